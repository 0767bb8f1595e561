#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "falconmeta/cluster/cluster.h"
#include "falconmeta/harness/metrics.h"
#include "falconmeta/harness/trace.h"
#include "falconmeta/harness/tree_gen.h"

namespace falconmeta::harness {

sim::Task<OpResult> ExecuteTraceOp(ClientSession* client, TraceOp op);

// One sequential stream per client, all clients concurrently. Returns the
// result codes of each stream in order.
std::vector<std::vector<Code>> RunStreams(Cluster& cluster, std::vector<std::vector<TraceOp>> streams);

// Creates the tree with every client session; directories level by level.
Status LoadTree(Cluster& cluster, const GeneratedTree& tree);
// Resolves every file once so that each MNode caches the directories its
// files need.
void WarmReplicas(Cluster& cluster, const GeneratedTree& tree);

bool IsClientToMNode(sim::Address src, sim::Address dst);
uint64_t InterMNodeMessages(const sim::Counters& counters);
uint64_t ClientToMNodeMessages(const sim::Counters& counters);

struct TraverseReport {
  uint64_t files = 0;
  uint64_t sessions = 0;
  uint64_t opens = 0;
  uint64_t closes = 0;
  uint64_t failures = 0;
  uint64_t client_to_mnode = 0;
  uint64_t inter_mnode = 0;
  uint64_t extra_hops = 0;
  bool exactly_once = true;
  Metrics metrics;
};

// Every session opens, reads and closes every file once in its own seeded
// random order.
TraverseReport RunTraverse(Cluster& cluster, const GeneratedTree& tree, uint64_t seed);

struct BurstReport {
  uint32_t burst = 0;
  uint64_t window_ns = 0;
  uint64_t failures = 0;
  std::vector<double> cv;           // per window, this system
  std::vector<double> baseline_cv;  // per window, directory-affinity placement
  double mean_cv = 0;
  double max_cv = 0;
  double baseline_mean_cv = 0;
  double baseline_min_cv = 0;
  Metrics metrics;
};

// Each session visits leaf directories in seeded random order and accesses
// `burst` files of each directory consecutively.
BurstReport RunBurst(Cluster& cluster, const GeneratedTree& tree, uint32_t burst, uint64_t seed, uint64_t window_ns);

double CoefficientOfVariation(const std::vector<double>& xs);

struct ReplayReport {
  std::vector<Code> results;
  uint64_t failures = 0;  // results other than kOk
  Metrics metrics;
};

// Replays ops in sequence order; op i runs on session i mod clients.
ReplayReport Replay(Cluster& cluster, const std::vector<TraceOp>& ops);

}  // namespace falconmeta::harness
