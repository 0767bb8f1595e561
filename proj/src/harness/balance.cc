#include "falconmeta/harness/balance.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace falconmeta::harness {

BalanceReport MeasureBalance(const Cluster& cluster) {
  BalanceReport rep;
  rep.counts = cluster.InodeCounts();
  for (const auto& [id, c] : rep.counts) rep.total += c;
  rep.min_share = rep.counts.empty() ? 0 : 1;
  for (const auto& [id, c] : rep.counts) {
    double s = rep.total == 0 ? 0 : static_cast<double>(c) / static_cast<double>(rep.total);
    rep.shares[id] = s;
    rep.max_share = std::max(rep.max_share, s);
    rep.min_share = std::min(rep.min_share, s);
  }
  const ExceptionTable& table = cluster.coordinator().table();
  rep.path_walk_entries = table.CountRule(RedirectRule::kPathWalk);
  rep.override_entries = table.CountRule(RedirectRule::kOverride);
  rep.table_version = table.version();
  return rep;
}

double EntryBound(size_t nodes) {
  double n = static_cast<double>(nodes);
  return n * std::log2(n) + n;
}

std::string BalanceReport::ToText() const {
  std::string out;
  char buf[128];
  for (const auto& [id, c] : counts) {
    std::snprintf(buf, sizeof(buf), "node %u  inodes %llu  share %.2f%%\n", Raw(id),
                  static_cast<unsigned long long>(c), shares.at(id) * 100);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "max %.2f%%  min %.2f%%  entries %zu (path-walk %zu, override %zu)  version %llu\n",
                max_share * 100, min_share * 100, entries(), path_walk_entries, override_entries,
                static_cast<unsigned long long>(table_version));
  out += buf;
  return out;
}

Metrics BalanceReport::ToMetrics() const {
  Metrics m;
  for (const auto& [id, s] : shares) {
    m["balance.share." + std::to_string(Raw(id))] = s;
    m["balance.inodes." + std::to_string(Raw(id))] = static_cast<double>(counts.at(id));
  }
  m["balance.total"] = static_cast<double>(total);
  m["balance.max_share"] = max_share;
  m["balance.min_share"] = min_share;
  m["balance.entries.path_walk"] = static_cast<double>(path_walk_entries);
  m["balance.entries.override"] = static_cast<double>(override_entries);
  m["balance.table_version"] = static_cast<double>(table_version);
  return m;
}

}  // namespace falconmeta::harness
