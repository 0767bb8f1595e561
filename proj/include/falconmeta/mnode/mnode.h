#pragma once

#include <array>
#include <coroutine>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "falconmeta/mnode/meta_actor.h"
#include "falconmeta/model/path.h"
#include "falconmeta/storage/inode_table.h"

namespace falconmeta {

inline constexpr uint8_t kMaxHops = 16;

// Metadata server: namespace replica plus one shard of the inode table.
class MNode : public MetaActor {
 public:
  MNode(sim::Simulator& sim, NodeId id, NodeConfig config, ClusterView view, ExceptionTable table);

  NodeId id() const { return id_; }
  const InodeTable& inodes() const { return inodes_; }
  bool IsBlocked(const std::string& name) const { return blocked_.contains(name); }
  bool paused() const { return paused_; }
  size_t queued() const;
  size_t participant_txs() const { return participant_txs_.size(); }

  // Test hook: while held, queued requests wait so that they are merged
  // into one batch on release.
  void HoldQueues(bool hold);

 protected:
  void Handle(rpc::Message msg, sim::Address src) override;
  void ApplyMutation(const Mutation& m) override;
  void ResetVolatile() override;
  void AfterRecovery(const ReplayResult& replay) override;
  sim::Task<rpc::LookupReply> LookupLocal(DentryKey key) override;

 private:
  struct Outcome {
    bool retry = false;
    rpc::MetaReply reply;
  };
  struct Pending {
    rpc::MetaRequest req;
    PathName path;
    Outcome* out = nullptr;
    std::coroutine_handle<> handle;
  };
  struct EnqueueAwaiter {
    MNode* node;
    Pending pending;
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h) {
      pending.handle = h;
      node->Enqueue(std::move(pending));
    }
    void await_resume() const noexcept {}
  };
  struct ParticipantTx {
    sim::Address coordinator = 0;
    std::vector<rpc::TxOp> ops;
    std::vector<LockRequest> locks;
  };

  // Client requests.
  sim::Task<void> ServeMeta(rpc::Message msg, sim::Address src);
  sim::Task<Code> RouteOwner(PathName path, Credentials who, NodeId* owner);
  void Enqueue(Pending p);
  void MaybeStartWorkers();
  sim::Task<void> Worker();
  std::vector<Pending> TakeBatch();
  sim::Task<void> ExecuteBatch(std::vector<Pending> batch);
  rpc::MetaReply ExecuteOne(const Pending& p, const Chain& chain, std::vector<Mutation>* muts);
  rpc::MetaReply RootReply(const rpc::MetaRequest& req) const;

  // Namespace replication and global operations.
  sim::Task<void> ServeLookup(rpc::Message msg, sim::Address src);
  sim::Task<void> ServeInvalidate(rpc::Message msg, sim::Address src);
  sim::Task<void> ServeDirOp(rpc::Message msg, sim::Address src);
  // Invalidates `key` on every other MNode and locally; ORs children reports.
  sim::Task<Code> BroadcastInvalidation(DentryKey key, DirectoryId dir_id, bool check_children, bool* children);

  // Two-phase commit, participant side.
  sim::Task<void> ServePrepare(rpc::Message msg, sim::Address src);
  sim::Task<void> ServeDecision(rpc::Message msg, sim::Address src);
  sim::Task<void> ResolveTx(uint64_t txid, bool commit);
  sim::Task<void> WatchTx(uint64_t txid);

  // Migration source.
  sim::Task<void> ServeMigrate(rpc::Message msg, sim::Address src);
  sim::Task<uint64_t> MigrateTo(NodeId dest, std::vector<DentryKey> keys);

  sim::Task<void> ServeControl(rpc::Message msg, sim::Address src);

  bool OwnsPlacement(DirectoryId pid, const std::string& name) const;

  NodeId id_;
  InodeTable inodes_;
  uint64_t id_counter_ = 0;

  static constexpr size_t kQueueCount = 7;
  std::array<std::deque<Pending>, kQueueCount> queues_;
  size_t next_queue_ = 0;
  uint32_t active_workers_ = 0;
  bool hold_ = false;

  std::set<std::string> blocked_;
  std::map<std::string, std::vector<std::coroutine_handle<>>> block_waiters_;
  bool paused_ = false;
  std::vector<std::coroutine_handle<>> pause_waiters_;

  std::map<uint64_t, ParticipantTx> participant_txs_;
};

}  // namespace falconmeta
