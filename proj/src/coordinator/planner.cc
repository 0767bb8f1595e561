#include "falconmeta/coordinator/planner.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace falconmeta {

uint64_t ClusterStats::total() const {
  uint64_t t = 0;
  for (const auto& n : nodes) t += n.inode_count;
  return t;
}

double ClusterStats::MaxShare() const {
  uint64_t t = total();
  if (t == 0) return 0;
  uint64_t m = 0;
  for (const auto& n : nodes) m = std::max(m, n.inode_count);
  return static_cast<double>(m) / static_cast<double>(t);
}

uint32_t ReportSize(size_t nodes) {
  double n = static_cast<double>(nodes);
  return static_cast<uint32_t>(std::ceil(n * std::log2(std::max(n, 2.0))));
}

std::string RebalancePlan::ToText() const {
  std::ostringstream out;
  for (const auto& s : steps) {
    out << s.name << ' ' << (s.rule == RedirectRule::kPathWalk ? "path-walk" : "override") << ' ' << Raw(s.source)
        << ' ' << Raw(s.target) << ' ' << s.count << '\n';
  }
  return out.str();
}

ExceptionTable RebalancePlan::Apply(const ExceptionTable& table) const {
  if (steps.empty()) return table;
  ExceptionTable out = table;
  for (const auto& s : steps) {
    out = out.With(ExceptionEntry{s.name, s.rule, s.target});
  }
  // One version bump per published table.
  return out.WithVersion(table.version() + 1);
}

namespace {

using Loads = std::map<NodeId, double>;

double MaxOf(const Loads& loads) {
  double m = 0;
  for (const auto& [_, v] : loads) m = std::max(m, v);
  return m;
}

// Lowest NodeId wins ties.
NodeId ArgMax(const Loads& loads) {
  NodeId best = loads.begin()->first;
  for (const auto& [n, v] : loads) {
    if (v > loads.at(best)) best = n;
  }
  return best;
}

NodeId ArgMin(const Loads& loads) {
  NodeId best = loads.begin()->first;
  for (const auto& [n, v] : loads) {
    if (v < loads.at(best)) best = n;
  }
  return best;
}

}  // namespace

RebalancePlan Rebalance(const ClusterStats& stats, const ExceptionTable& table, double epsilon) {
  RebalancePlan plan;
  if (stats.nodes.empty()) {
    plan.status = Status(Code::kEmptyCluster, "no nodes");
    return plan;
  }
  Loads loads;
  // Projected count of each reported name on each node.
  std::map<std::string, Loads> names;
  for (const auto& n : stats.nodes) {
    loads[n.node] = static_cast<double>(n.inode_count);
    for (const auto& nc : n.top) names[nc.name][n.node] = static_cast<double>(nc.count);
  }
  const double n = static_cast<double>(loads.size());
  const double bound = (1.0 / n + epsilon) * static_cast<double>(stats.total());
  // Path-walk names are spread already and never chosen again. A name with an
  // override entry may only be converted to path-walk.
  std::map<std::string, RedirectRule> rules;
  for (const auto& [name, e] : table.entries()) rules[name] = e.rule;

  while (MaxOf(loads) > bound) {
    NodeId hot = ArgMax(loads);
    NodeId cold = ArgMin(loads);
    std::string pick;
    double f = 0;
    for (const auto& [name, per] : names) {
      auto r = rules.find(name);
      if (r != rules.end() && r->second == RedirectRule::kPathWalk) continue;
      auto it = per.find(hot);
      if (it == per.end() || it->second <= f) continue;
      pick = name;
      f = it->second;
    }
    if (f == 0) {
      plan.status = Status(Code::kUnbalanceable, "node " + std::to_string(Raw(hot)) + " has no candidate names left");
      break;
    }
    const double hot_load = loads[hot];
    const double cold_load = loads[cold];
    const double walk_max = std::max(hot_load - (n - 1) / n * f, cold_load + f / n);
    const double over_max = std::max(hot_load - f, cold_load + f);
    const bool overridden = rules.contains(pick);

    PlanStep step;
    step.name = pick;
    step.source = hot;
    step.count = static_cast<uint64_t>(std::llround(f));
    if (!overridden && hot != cold && over_max <= walk_max) {
      step.rule = RedirectRule::kOverride;
      step.target = cold;
      loads[hot] -= f;
      loads[cold] += f;
      names[pick][hot] = 0;
      names[pick][cold] += f;
    } else {
      step.rule = RedirectRule::kPathWalk;
      for (auto& [node, v] : loads) v += node == hot ? -(n - 1) / n * f : f / n;
    }
    rules[pick] = step.rule;
    plan.steps.push_back(std::move(step));
  }
  for (const auto& [node, v] : loads) plan.projected[node] = static_cast<uint64_t>(std::llround(v));
  return plan;
}

ExceptionTable ShrinkTable(const ExceptionTable& table, const ClusterStats& stats, const Ring& ring,
                           double epsilon, std::mt19937_64& rng) {
  if (table.empty() || stats.nodes.empty()) return table;
  Loads loads;
  for (const auto& n : stats.nodes) loads[n.node] = static_cast<double>(n.inode_count);
  const double bound = (1.0 / static_cast<double>(loads.size()) + epsilon) * static_cast<double>(stats.total());

  std::vector<std::string> walk;
  std::vector<std::string> over;
  for (const auto& [name, e] : table.entries()) (e.rule == RedirectRule::kPathWalk ? walk : over).push_back(name);
  std::shuffle(walk.begin(), walk.end(), rng);
  std::shuffle(over.begin(), over.end(), rng);
  std::vector<std::string> order = walk;
  order.insert(order.end(), over.begin(), over.end());

  ExceptionTable out = table;
  bool removed = false;
  for (const auto& name : order) {
    // Without an entry every file with this name returns to its hash owner.
    Loads trial = loads;
    double moved = 0;
    for (const auto& n : stats.nodes) {
      auto it = n.tracked.find(name);
      double c = it == n.tracked.end() ? 0 : static_cast<double>(it->second);
      trial[n.node] -= c;
      moved += c;
    }
    NodeId home = OwnerByName(ring, name);
    if (!trial.contains(home)) continue;
    trial[home] += moved;
    if (MaxOf(trial) <= bound) {
      loads = std::move(trial);
      out = out.Without(name);
      removed = true;
    }
  }
  if (!removed) return table;
  return out.WithVersion(table.version() + 1);
}

}  // namespace falconmeta
