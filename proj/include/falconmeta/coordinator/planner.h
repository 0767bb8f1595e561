#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "falconmeta/common/status.h"
#include "falconmeta/index/exception_table.h"
#include "falconmeta/index/ring.h"
#include "falconmeta/rpc/messages.h"

namespace falconmeta {

// Per-node view reported by MNodes.
struct NodeStats {
  NodeId node{0};
  uint64_t inode_count = 0;
  std::vector<rpc::NameCount> top;         // most frequent local names
  std::map<std::string, uint64_t> tracked;  // exact local counts of named files
};

struct ClusterStats {
  std::vector<NodeStats> nodes;

  uint64_t total() const;
  // max_i N_i / total (0 for an empty cluster).
  double MaxShare() const;
};

// Number of names each node reports: ceil(n * log2(max(n, 2))).
uint32_t ReportSize(size_t nodes);

struct PlanStep {
  std::string name;
  RedirectRule rule = RedirectRule::kOverride;
  NodeId source{0};
  NodeId target{0};  // override target; unused for path-walk
  uint64_t count = 0;

  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

struct RebalancePlan {
  std::vector<PlanStep> steps;
  // Projected per-node counts after the plan, in stats order.
  std::map<NodeId, uint64_t> projected;
  Status status;

  // One line per step: "<name> <path-walk|override> <source> <target> <count>".
  std::string ToText() const;
  ExceptionTable Apply(const ExceptionTable& table) const;
};

// Greedy planner. Repeatedly takes the most loaded node, moves its most
// frequent not-yet-redirected name using whichever rule leaves the smaller
// projected maximum (override on ties), until every projected count is at
// most (1/n + epsilon) of the total. status is kUnbalanceable when the most
// loaded node runs out of candidate names first.
RebalancePlan Rebalance(const ClusterStats& stats, const ExceptionTable& table, double epsilon);

// Removes table entries whose removal keeps every projected count within the
// bound. Path-walk entries are tried first, in random order, then override
// entries. Needs exact per-node counts of every entry name in `tracked`.
ExceptionTable ShrinkTable(const ExceptionTable& table, const ClusterStats& stats, const Ring& ring,
                           double epsilon, std::mt19937_64& rng);

}  // namespace falconmeta
