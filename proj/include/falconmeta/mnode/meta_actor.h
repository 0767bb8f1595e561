#pragma once

#include <coroutine>
#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "falconmeta/index/exception_table.h"
#include "falconmeta/index/ring.h"
#include "falconmeta/mnode/wal_state.h"
#include "falconmeta/rpc/endpoint.h"
#include "falconmeta/sim/simulator.h"
#include "falconmeta/sim/task.h"
#include "falconmeta/storage/lock_table.h"
#include "falconmeta/storage/namespace_replica.h"
#include "falconmeta/storage/wal.h"

namespace falconmeta {

struct NodeConfig {
  uint32_t workers = 4;
  uint32_t max_batch = 64;
  // Simulated processing cost of one batch: base + per request.
  uint64_t batch_base_ns = 20'000;
  uint64_t per_request_ns = 2'000;
  uint64_t flush_ns = 10'000;
  uint64_t rpc_timeout_ns = rpc::kDefaultRpcTimeoutNs;
  uint64_t decision_retry_ns = 20'000'000;
  // A crash may persist a random prefix of unflushed log bytes.
  bool torn_writes = true;
  // Mutation-test hook: invalidation requests are acknowledged but ignored.
  bool skip_invalidation = false;
};

// Suspends until resumed by WakeAll on the same list.
struct GateAwaiter {
  std::vector<std::coroutine_handle<>>* waiters;
  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<> h) const { waiters->push_back(h); }
  void await_resume() const noexcept {}
};

// State and machinery shared by MNodes and the coordinator: durable log,
// namespace replica with fetch-on-miss, lock table, membership, and the
// transaction-coordinator side of two-phase commit.
class MetaActor : public sim::Actor {
 public:
  MetaActor(sim::Simulator& sim, sim::Address self, NodeConfig config, ClusterView view, ExceptionTable table);
  ~MetaActor() override;

  void Deliver(sim::Envelope env) override;
  void OnCrash() override;
  void OnRestart() override;

  sim::Address address() const { return self_; }
  const ExceptionTable& table() const { return table_; }
  const ClusterView& view() const { return view_; }
  const Ring& ring() const { return ring_; }
  const NamespaceReplica& replica() const { return replica_; }
  const LockTable& locks() const { return locks_; }
  Disk& disk() { return disk_; }
  const NodeConfig& config() const { return config_; }
  NodeConfig& mutable_config() { return config_; }
  uint64_t incarnation() const { return incarnation_; }
  const ReplayResult& last_replay() const { return last_replay_; }

 protected:
  // Rebuilds durable state from the disk. Runs at construction and restart.
  void Recover();

  virtual void Handle(rpc::Message msg, sim::Address src) = 0;
  virtual void ApplyMutation(const Mutation& m);
  virtual void ResetVolatile() {}
  virtual void AfterRecovery(const ReplayResult& replay);
  // Dentry view of a locally owned directory inode.
  virtual sim::Task<rpc::LookupReply> LookupLocal(DentryKey key);

  // Appends one BeginBatch..CommitBatch frame; no flush.
  void AppendBatch(const std::vector<Mutation>& muts);
  // Durability point, after the simulated device latency.
  sim::Task<void> Flush();
  // Log, apply and flush a standalone mutation batch.
  sim::Task<void> Persist(std::vector<Mutation> muts);
  sim::Task<void> PersistOne(Mutation m);

  struct Chain {
    Code status = Code::kOk;
    std::vector<DentryKey> keys;
    std::vector<uint64_t> gens;
    DirectoryId dir = kRootDir;         // last resolved directory
    Permission perm = kRootPermission;  // its permission
  };
  // Resolves `components` as directories from the root using the local
  // replica, fetching missing or invalid dentries from their owners. Exec
  // permission is checked on every directory searched; the caller checks
  // the last one.
  sim::Task<Chain> ResolveDirs(std::vector<std::string> components, Credentials who);
  bool ChainStillValid(const Chain& chain) const;
  // One fetch of `key` from its owner. kAborted-like outcomes are reported
  // as kTimeout; a discarded stale response reports ok=false via `installed`.
  sim::Task<rpc::LookupReply> FetchDentry(DentryKey key, bool* installed);

  // Transactions coordinated by this node.
  uint64_t NewTxid();
  // Sends the decision until every participant acknowledged it.
  sim::Task<void> NotifyDecision(uint64_t txid, std::vector<uint32_t> participants, bool commit);
  rpc::TxState TxStateOf(uint64_t txid) const;

  void AdoptTable(const ExceptionTable& t);
  void AdoptView(const ClusterView& v);
  // Payload for replies to a requester holding table version `seen`.
  bool StaleTable(uint64_t seen) const { return seen < table_.version(); }

  void WakeAll(std::vector<std::coroutine_handle<>>* waiters);
  template <typename T>
  void Reply(sim::Address dst, uint64_t req_id, T body) {
    ep_.Reply(dst, req_id, rpc::Payload(std::move(body)));
  }

  sim::Simulator& sim_;
  sim::Address self_;
  NodeConfig config_;
  rpc::Endpoint ep_;
  sim::TaskScope scope_;
  NamespaceReplica replica_;
  LockTable locks_;
  Disk disk_;
  std::unique_ptr<Wal> wal_;
  ExceptionTable table_;
  ClusterView view_;
  Ring ring_;
  uint64_t incarnation_ = 0;
  uint64_t next_tx_ = 0;
  std::set<uint64_t> active_txs_;
  std::set<uint64_t> committed_txs_;
  std::mt19937_64 torn_rng_;
  ReplayResult last_replay_;

 private:
  void HandleCommon(rpc::Message msg, sim::Address src);
  ClusterView initial_view_;
  ExceptionTable initial_table_;
};

}  // namespace falconmeta
