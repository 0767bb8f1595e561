#include "falconmeta/harness/coalescing.h"

#include <map>
#include <set>

#include "falconmeta/harness/workload.h"

namespace falconmeta::harness {
namespace {

sim::Task<void> OneOp(ClientSession* c, TraceOp op, Code* out, size_t* pending) {
  OpResult r = co_await ExecuteTraceOp(c, std::move(op));
  *out = r.status;
  --*pending;
}

}  // namespace

HeldBatchResult RunHeldBatch(Cluster& cluster, NodeId node, const std::vector<TraceOp>& ops) {
  HeldBatchResult res;
  res.results.assign(ops.size(), Code::kTimeout);
  MNode& mn = cluster.mnode(node);
  auto& counters = cluster.sim().counters();
  mn.HoldQueues(true);
  size_t pending = ops.size();
  for (size_t i = 0; i < ops.size(); ++i) {
    ClientSession* c = &cluster.client(i % cluster.client_count());
    c->Spawn(OneOp(c, ops[i], &res.results[i], &pending));
  }
  cluster.sim().RunUntil([&] { return mn.queued() == ops.size(); }, 10'000'000);
  uint64_t b0 = counters.Get("batch.count");
  uint64_t l0 = counters.Get("batch.locks");
  uint64_t f0 = counters.Get("wal.flush");
  uint64_t v0 = counters.Get("batch.revalidate");
  mn.HoldQueues(false);
  cluster.sim().RunUntil([&pending] { return pending == 0; }, 10'000'000);
  res.batches = counters.Get("batch.count") - b0;
  res.locks = counters.Get("batch.locks") - l0;
  res.flushes = counters.Get("wal.flush") - f0;
  res.revalidations = counters.Get("batch.revalidate") - v0;
  return res;
}

uint64_t ExpectedBatchLocks(const std::vector<TraceOp>& ops) {
  std::map<TraceOpKind, std::pair<std::set<std::string>, std::set<std::string>>> groups;
  for (const auto& op : ops) {
    auto parsed = PathName::Parse(op.path);
    if (!parsed.ok()) continue;
    auto& [dirs, targets] = groups[op.kind];
    const auto& comps = parsed.value().components();
    size_t walked = op.kind == TraceOpKind::kReaddir ? comps.size() : comps.size() - 1;
    std::string prefix;
    for (size_t i = 0; i < walked; ++i) {
      prefix += "/" + comps[i];
      dirs.insert(prefix);
    }
    if (op.kind != TraceOpKind::kReaddir) targets.insert(op.path);
  }
  uint64_t n = 0;
  for (const auto& [kind, g] : groups) n += g.first.size() + g.second.size();
  return n;
}

uint64_t RunSequential(Cluster& cluster, const std::vector<TraceOp>& ops, std::vector<Code>* results) {
  auto& counters = cluster.sim().counters();
  uint64_t f0 = counters.Get("wal.flush");
  for (const auto& op : ops) {
    auto r = cluster.Await(0, ExecuteTraceOp(&cluster.client(0), op));
    if (results) results->push_back(r ? r->status : Code::kTimeout);
  }
  return counters.Get("wal.flush") - f0;
}

}  // namespace falconmeta::harness
