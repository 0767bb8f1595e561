#pragma once

#include <cstdint>
#include <vector>

#include "falconmeta/cluster/cluster.h"
#include "falconmeta/harness/trace.h"

namespace falconmeta::harness {

struct HeldBatchResult {
  uint64_t batches = 0;
  uint64_t locks = 0;
  uint64_t flushes = 0;
  uint64_t revalidations = 0;
  std::vector<Code> results;
};

// Queues every op on `node` while its workers are held, then releases them
// so that requests of one kind run as one batch. Every op must be owned by
// `node` and the node's replica must already hold the directories involved.
HeldBatchResult RunHeldBatch(Cluster& cluster, NodeId node, const std::vector<TraceOp>& ops);

// Locks one batch needs: per op kind, the distinct directory prefixes on the
// resolved paths plus the distinct target paths.
uint64_t ExpectedBatchLocks(const std::vector<TraceOp>& ops);

// Runs each op to completion before issuing the next; returns flushes.
uint64_t RunSequential(Cluster& cluster, const std::vector<TraceOp>& ops, std::vector<Code>* results);

}  // namespace falconmeta::harness
