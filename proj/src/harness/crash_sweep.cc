#include "falconmeta/harness/crash_sweep.h"

#include <functional>
#include <map>

#include "falconmeta/cluster/cluster.h"

namespace falconmeta::harness {
namespace {

constexpr uint64_t kRestartAfterNs = 50'000'000;
constexpr uint64_t kSettleEvents = 20'000'000;

ClusterConfig SweepConfig(uint64_t seed) {
  ClusterConfig c;
  c.mnodes = 3;
  c.clients = 1;
  c.sim.seed = seed;
  return c;
}

Ring SweepRing() {
  ClusterView v;
  for (uint32_t i = 0; i < 3; ++i) v.nodes.push_back(NodeId{i});
  return v.BuildRing();
}

std::string NameOn(const Ring& ring, const std::string& base, const std::function<bool(NodeId)>& want) {
  for (int i = 0;; ++i) {
    std::string n = base + std::to_string(i) + ".dat";
    if (want(OwnerByName(ring, n))) return n;
  }
}

bool Present(const CensusReport& c, const std::string& path) { return c.by_path.contains(path); }

// Runs one scenario: `setup` prepares the cluster, `start` launches the
// operation, `check` inspects the settled cluster. With delivery 0 no crash
// is injected and the number of deliveries is returned.
struct Scenario {
  std::function<void(Cluster&)> setup;
  std::function<void(Cluster&, bool* done)> start;
  std::function<void(Cluster&, CrashPoint*)> check;
  std::map<std::string, sim::Address> targets;
};

uint64_t RunPoint(uint64_t seed, const Scenario& s, uint64_t delivery, const std::string& target, CrashPoint* pt) {
  Cluster cl(SweepConfig(seed));
  s.setup(cl);
  cl.sim().RunUntilIdle(kSettleEvents);
  size_t before = cl.Census().by_path.size();
  uint64_t d0 = cl.sim().deliveries();
  if (delivery > 0) {
    sim::FaultPlan plan;
    plan.delivery_crashes.push_back({delivery, s.targets.at(target), kRestartAfterNs});
    cl.sim().SetFaultPlan(plan);
  }
  bool done = false;
  s.start(cl, &done);
  pt->settled = cl.sim().RunUntilIdle(kSettleEvents);
  uint64_t used = cl.sim().deliveries() - d0;
  cl.sim().SetFaultPlan(sim::FaultPlan{});
  CensusReport census = cl.Census();
  pt->census_ok = census.ok();
  if (!pt->census_ok) {
    pt->detail = !census.duplicates.empty() ? "duplicate " + census.duplicates.front()
                                            : "orphan " + census.orphans.front();
  }
  pt->count_ok = census.by_path.size() == before;
  if (!pt->count_ok) pt->detail += " count " + std::to_string(before) + "->" + std::to_string(census.by_path.size());
  pt->placement_ok = census.misplaced.empty();
  if (!pt->placement_ok) pt->detail += " misplaced " + census.misplaced.front();
  s.check(cl, pt);
  return used;
}

CrashSweepReport Sweep(const std::string& op, uint64_t seed, const Scenario& s) {
  CrashSweepReport rep;
  rep.op = op;
  CrashPoint clean;
  rep.boundaries = RunPoint(seed, s, 0, "", &clean);
  if (!clean.ok()) {
    clean.target = "none";
    rep.failed.push_back(clean);
    ++rep.failures;
  }
  for (uint64_t k = 1; k <= rep.boundaries; ++k) {
    for (const auto& [target, addr] : s.targets) {
      CrashPoint pt;
      pt.delivery = k;
      pt.target = target;
      RunPoint(seed, s, k, target, &pt);
      ++rep.points;
      if (pt.atomic_ok && pt.detail.find("applied") != std::string::npos) ++rep.applied;
      if (!pt.ok()) {
        ++rep.failures;
        if (rep.failed.size() < 16) rep.failed.push_back(pt);
      }
    }
  }
  std::string k = "crash." + op + ".";
  rep.metrics[k + "boundaries"] = static_cast<double>(rep.boundaries);
  rep.metrics[k + "points"] = static_cast<double>(rep.points);
  rep.metrics[k + "failures"] = static_cast<double>(rep.failures);
  rep.metrics[k + "applied"] = static_cast<double>(rep.applied);
  return rep;
}

sim::Task<void> Flag(sim::Task<OpResult> t, bool* done) {
  co_await std::move(t);
  *done = true;
}

}  // namespace

CrashSweepReport SweepRename(uint64_t seed) {
  Ring ring = SweepRing();
  std::string src = NameOn(ring, "x", [](NodeId) { return true; });
  NodeId a = OwnerByName(ring, src);
  std::string dst = NameOn(ring, "y", [a](NodeId n) { return n != a; });
  NodeId b = OwnerByName(ring, dst);
  std::string from = "/a/" + src;
  std::string to = "/b/" + dst;

  Scenario s;
  s.targets = {{"coordinator", sim::kCoordinatorAddress}, {"source", Raw(a)}, {"dest", Raw(b)}};
  s.setup = [from](Cluster& cl) {
    auto& c = cl.client(0);
    cl.Await(0, c.Mkdir("/a", 0755));
    cl.Await(0, c.Mkdir("/b", 0755));
    cl.Await(0, c.Create(from, 0644));
    cl.Await(0, c.Close(from, 77, 5));
  };
  s.start = [from, to](Cluster& cl, bool* done) {
    auto& c = cl.client(0);
    c.Spawn(Flag(c.Rename(from, to), done));
  };
  s.check = [from, to](Cluster& cl, CrashPoint* pt) {
    CensusReport census = cl.Census();
    bool at_src = Present(census, from);
    bool at_dst = Present(census, to);
    pt->atomic_ok = at_src != at_dst;
    if (!pt->atomic_ok) pt->detail += at_src ? " both present" : " both absent";
    if (at_dst) pt->detail += " applied";
    const std::string& live = at_dst ? to : from;
    auto r = cl.Await(0, cl.client(0).GetAttr(live));
    pt->live_ok = r && r->status == Code::kOk && r->inode && r->inode->size == 77;
    if (!pt->live_ok) pt->detail += " getattr " + live + " failed";
  };
  return Sweep("rename", seed, s);
}

CrashSweepReport SweepMigration(uint64_t seed) {
  Ring ring = SweepRing();
  std::string name = NameOn(ring, "m", [](NodeId) { return true; });
  NodeId source = OwnerByName(ring, name);
  NodeId target = NodeId{(Raw(source) + 1) % 3};
  constexpr int kDirs = 6;

  Scenario s;
  s.targets = {{"coordinator", sim::kCoordinatorAddress}, {"source", Raw(source)}, {"dest", Raw(target)}};
  s.setup = [name](Cluster& cl) {
    auto& c = cl.client(0);
    for (int d = 0; d < kDirs; ++d) {
      std::string dir = "/d" + std::to_string(d);
      cl.Await(0, c.Mkdir(dir, 0755));
      cl.Await(0, c.Create(dir + "/" + name, 0644));
    }
  };
  s.start = [name, target](Cluster& cl, bool* done) {
    ExceptionTable next = cl.coordinator().table().With(ExceptionEntry{name, RedirectRule::kOverride, target});
    next = next.WithVersion(cl.coordinator().table().version() + 1);
    cl.coordinator().StartPublish(next, [done](const RebalanceOutcome&) { *done = true; });
  };
  s.check = [name](Cluster& cl, CrashPoint* pt) {
    pt->atomic_ok = true;
    pt->live_ok = true;
    for (int d = 0; d < kDirs; ++d) {
      std::string path = "/d" + std::to_string(d) + "/" + name;
      auto r = cl.Await(0, cl.client(0).GetAttr(path));
      if (!r || r->status != Code::kOk) {
        pt->live_ok = false;
        pt->detail += " getattr " + path + " " + std::string(CodeName(r ? r->status : Code::kTimeout));
        break;
      }
    }
    if (cl.coordinator().table().Find(name) != nullptr) pt->detail += " applied";
  };
  return Sweep("migration", seed, s);
}

}  // namespace falconmeta::harness
