#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "falconmeta/cluster/cluster.h"
#include "falconmeta/harness/metrics.h"

namespace falconmeta::harness {

struct BalanceReport {
  std::map<NodeId, uint64_t> counts;  // inode records held per MNode
  std::map<NodeId, double> shares;
  uint64_t total = 0;
  double max_share = 0;
  double min_share = 0;
  size_t path_walk_entries = 0;
  size_t override_entries = 0;
  uint64_t table_version = 0;

  size_t entries() const { return path_walk_entries + override_entries; }
  std::string ToText() const;
  Metrics ToMetrics() const;
};

BalanceReport MeasureBalance(const Cluster& cluster);

// Entry bound for an n-node cluster: n log2 n + n.
double EntryBound(size_t nodes);

}  // namespace falconmeta::harness
