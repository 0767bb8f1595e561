#include "falconmeta/mnode/mnode.h"

#include <algorithm>
#include <utility>

#include "falconmeta/index/route.h"

namespace falconmeta {

using rpc::Message;
using rpc::MetaOp;
using sim::Address;

MNode::MNode(sim::Simulator& sim, NodeId id, NodeConfig config, ClusterView view, ExceptionTable table)
    : MetaActor(sim, Raw(id), config, std::move(view), std::move(table)), id_(id) {
  Recover();
}

size_t MNode::queued() const {
  size_t n = 0;
  for (const auto& q : queues_) n += q.size();
  return n;
}

void MNode::HoldQueues(bool hold) {
  hold_ = hold;
  if (!hold_) MaybeStartWorkers();
}

void MNode::ResetVolatile() {
  for (auto& q : queues_) q.clear();
  active_workers_ = 0;
  hold_ = false;
  inodes_.Clear();
  id_counter_ = 0;
  blocked_.clear();
  block_waiters_.clear();
  paused_ = false;
  pause_waiters_.clear();
  participant_txs_.clear();
}

void MNode::ApplyMutation(const Mutation& m) {
  switch (m.kind) {
    case Mutation::Kind::kPutInode:
      inodes_.Put(m.record);
      if (IdOwner(Raw(m.record.id)) == id_) id_counter_ = std::max(id_counter_, IdCounter(Raw(m.record.id)));
      break;
    case Mutation::Kind::kEraseInode:
      inodes_.Erase(m.record.key);
      break;
    case Mutation::Kind::kBlockNames:
      for (const auto& n : m.names) blocked_.insert(n);
      break;
    case Mutation::Kind::kUnblockNames:
      for (const auto& n : m.names) {
        blocked_.erase(n);
        auto it = block_waiters_.find(n);
        if (it != block_waiters_.end()) {
          WakeAll(&it->second);
          block_waiters_.erase(it);
        }
      }
      break;
    default:
      MetaActor::ApplyMutation(m);
  }
}

bool MNode::OwnsPlacement(DirectoryId pid, const std::string& name) const {
  return PlacementOwner(ring_, table_, pid, name) == id_;
}

void MNode::Handle(Message msg, Address src) {
  if (std::holds_alternative<rpc::MetaRequest>(msg.body)) {
    scope_.Spawn(ServeMeta(std::move(msg), src));
  } else if (std::holds_alternative<rpc::LookupRequest>(msg.body)) {
    scope_.Spawn(ServeLookup(std::move(msg), src));
  } else if (std::holds_alternative<rpc::InvalidateRequest>(msg.body)) {
    scope_.Spawn(ServeInvalidate(std::move(msg), src));
  } else if (std::holds_alternative<rpc::DirOpRequest>(msg.body)) {
    scope_.Spawn(ServeDirOp(std::move(msg), src));
  } else if (std::holds_alternative<rpc::PrepareRequest>(msg.body)) {
    scope_.Spawn(ServePrepare(std::move(msg), src));
  } else if (std::holds_alternative<rpc::DecisionRequest>(msg.body)) {
    scope_.Spawn(ServeDecision(std::move(msg), src));
  } else if (std::holds_alternative<rpc::MigrateRequest>(msg.body)) {
    scope_.Spawn(ServeMigrate(std::move(msg), src));
  } else {
    scope_.Spawn(ServeControl(std::move(msg), src));
  }
}

// ---- client requests ---------------------------------------------------------

rpc::MetaReply MNode::RootReply(const rpc::MetaRequest& req) const {
  rpc::MetaReply reply;
  InodeRecord root;
  root.kind = InodeKind::kDirectory;
  root.perm = kRootPermission;
  switch (req.op) {
    case MetaOp::kGetAttr:
    case MetaOp::kOpen:
      reply.inode = root;
      break;
    case MetaOp::kMkdir:
    case MetaOp::kCreate:
      reply.status = Code::kExist;
      break;
    default:
      reply.status = Code::kIsDir;
  }
  return reply;
}

sim::Task<Code> MNode::RouteOwner(PathName path, Credentials who, NodeId* owner) {
  const std::string& name = path.leaf();
  const ExceptionEntry* e = table_.Find(name);
  if (e != nullptr && e->rule == RedirectRule::kPathWalk) {
    std::vector<std::string> parents(path.parent_components().begin(), path.parent_components().end());
    Chain chain = co_await ResolveDirs(std::move(parents), who);
    if (chain.status != Code::kOk) co_return chain.status;
    *owner = PlacementOwner(ring_, table_, chain.dir, name);
    co_return Code::kOk;
  }
  *owner = PlacementOwner(ring_, table_, kRootDir, name);
  co_return Code::kOk;
}

sim::Task<void> MNode::ServeMeta(Message msg, Address src) {
  rpc::MetaRequest req = std::get<rpc::MetaRequest>(msg.body);
  if (req.reply_to == 0) req.reply_to = src;
  ++req.hops;
  sim_.counters().Add("mnode.requests");
  sim_.counters().Add("mnode.requests." + std::to_string(self_));
  rpc::MetaReply reply;
  auto parsed = PathName::Parse(req.path);
  bool local_only = req.op == MetaOp::kReaddir;
  if (!parsed.ok()) {
    reply.status = parsed.code();
  } else if (req.hops > kMaxHops) {
    reply.status = Code::kTimeout;
  } else if (parsed->is_root() && !local_only) {
    reply = RootReply(req);
  } else {
    PathName path = *parsed;
    while (true) {
      while (paused_) {
        co_await GateAwaiter{&pause_waiters_};
      }
      if (!local_only) {
        while (blocked_.contains(path.leaf())) {
          sim_.counters().Add("mnode.parked");
          co_await GateAwaiter{&block_waiters_[path.leaf()]};
        }
        NodeId owner{0};
        Code rc = co_await RouteOwner(path, req.caller, &owner);
        if (rc != Code::kOk) {
          reply.status = rc;
          break;
        }
        if (owner != id_) {
          sim_.counters().Add("mnode.forward");
          Message fwd{msg.req_id, msg.table_version, req};
          ep_.Send(Raw(owner), fwd);
          co_return;
        }
      }
      Outcome out;
      EnqueueAwaiter enqueue{this, Pending{req, path, &out, {}}};
      co_await enqueue;
      if (out.retry) continue;
      reply = std::move(out.reply);
      break;
    }
  }
  reply.hops = req.hops;
  if (StaleTable(msg.table_version)) {
    reply.table = table_;
    reply.view = view_;
  }
  Reply(req.reply_to, msg.req_id, std::move(reply));
}

void MNode::Enqueue(Pending p) {
  queues_[static_cast<size_t>(p.req.op) % kQueueCount].push_back(std::move(p));
  MaybeStartWorkers();
}

void MNode::MaybeStartWorkers() {
  if (hold_) return;
  size_t pending = queued();
  while (active_workers_ < config_.workers && pending > 0) {
    ++active_workers_;
    pending = pending > config_.max_batch ? pending - config_.max_batch : 0;
    scope_.Spawn(Worker());
  }
}

std::vector<MNode::Pending> MNode::TakeBatch() {
  std::vector<Pending> batch;
  for (size_t i = 0; i < kQueueCount; ++i) {
    auto& q = queues_[(next_queue_ + i) % kQueueCount];
    if (q.empty()) continue;
    next_queue_ = (next_queue_ + i + 1) % kQueueCount;
    while (!q.empty() && batch.size() < config_.max_batch) {
      batch.push_back(std::move(q.front()));
      q.pop_front();
    }
    break;
  }
  return batch;
}

sim::Task<void> MNode::Worker() {
  // Requests that arrive at the same instant join one batch.
  co_await sim::Sleep(sim_, self_, 0);
  while (!hold_) {
    std::vector<Pending> batch = TakeBatch();
    if (batch.empty()) break;
    co_await ExecuteBatch(std::move(batch));
  }
  --active_workers_;
}

sim::Task<void> MNode::ExecuteBatch(std::vector<Pending> batch) {
  sim_.counters().Add("batch.count");
  sim_.counters().Add("batch.requests", batch.size());
  struct Item {
    Chain chain;
    bool done = false;
    bool retry = false;
    rpc::MetaReply reply;
  };
  std::vector<Item> items(batch.size());
  std::vector<LockRequest> held;
  std::vector<Mutation> muts;
  constexpr int kMaxValidationRounds = 16;
  for (int round = 0;; ++round) {
    // Resolve without holding locks: remote fetches never block lock holders.
    for (size_t i = 0; i < batch.size(); ++i) {
      Item& it = items[i];
      if (it.done) continue;
      const Pending& p = batch[i];
      std::vector<std::string> dirs;
      if (p.req.op == MetaOp::kReaddir) {
        dirs = p.path.components();
      } else {
        dirs.assign(p.path.parent_components().begin(), p.path.parent_components().end());
      }
      it.chain = co_await ResolveDirs(std::move(dirs), p.req.caller);
      if (it.chain.status != Code::kOk) {
        it.reply.status = it.chain.status;
        it.done = true;
      }
    }
    std::vector<LockRequest> wanted;
    for (size_t i = 0; i < batch.size(); ++i) {
      if (items[i].done) continue;
      for (const auto& k : items[i].chain.keys) wanted.push_back({{LockSpace::kDentry, k}, LockMode::kShared});
      if (batch[i].req.op != MetaOp::kReaddir) {
        LockMode mode = rpc::IsMutation(batch[i].req.op) ? LockMode::kExclusive : LockMode::kShared;
        wanted.push_back({{LockSpace::kInode, DentryKey{items[i].chain.dir, batch[i].path.leaf()}}, mode});
      }
    }
    held = CanonicalLockSet(std::move(wanted));
    sim_.counters().Add("batch.locks", held.size());
    co_await locks_.AcquireAll(held);
    uint64_t service = config_.batch_base_ns + config_.per_request_ns * batch.size();
    if (service > 0) {
      co_await sim::Sleep(sim_, self_, service);
    }
    bool valid = true;
    for (size_t i = 0; i < batch.size() && valid; ++i) {
      if (!items[i].done && !ChainStillValid(items[i].chain)) valid = false;
    }
    if (valid) break;
    // An invalidation raced with this batch: drop the locks and re-resolve.
    sim_.counters().Add("batch.revalidate");
    locks_.ReleaseAll(held);
    held.clear();
    if (round >= kMaxValidationRounds) {
      for (auto& it : items) {
        if (!it.done) {
          it.reply.status = Code::kTimeout;
          it.done = true;
        }
      }
      break;
    }
  }

  for (size_t i = 0; i < batch.size(); ++i) {
    Item& it = items[i];
    if (it.done) continue;
    const Pending& p = batch[i];
    if (p.req.op != MetaOp::kReaddir &&
        (blocked_.contains(p.path.leaf()) || !OwnsPlacement(it.chain.dir, p.path.leaf()))) {
      // Placement changed while waiting: let the dispatcher park or forward.
      it.retry = true;
      continue;
    }
    it.reply = ExecuteOne(p, it.chain, &muts);
  }
  if (!muts.empty()) {
    AppendBatch(muts);
    co_await Flush();
  }
  locks_.ReleaseAll(held);
  for (size_t i = 0; i < batch.size(); ++i) {
    batch[i].out->retry = items[i].retry;
    batch[i].out->reply = std::move(items[i].reply);
    sim_.Schedule(self_, 0, [h = batch[i].handle] { h.resume(); });
  }
}

rpc::MetaReply MNode::ExecuteOne(const Pending& p, const Chain& chain, std::vector<Mutation>* muts) {
  rpc::MetaReply reply;
  const rpc::MetaRequest& req = p.req;
  if (req.op == MetaOp::kReaddir) {
    if (!CheckPermission(chain.perm, req.caller, Access::kRead)) {
      reply.status = Code::kAccess;
      return reply;
    }
    reply.entries = inodes_.Children(chain.dir);
    return reply;
  }
  // Searching the parent directory needs exec on it.
  if (!CheckPermission(chain.perm, req.caller, Access::kExec)) {
    reply.status = Code::kAccess;
    return reply;
  }
  DentryKey key{chain.dir, p.path.leaf()};
  const InodeRecord* rec = inodes_.Find(key);
  auto apply = [&](const Mutation& m) {
    ApplyMutation(m);
    muts->push_back(m);
  };
  switch (req.op) {
    case MetaOp::kMkdir:
    case MetaOp::kCreate: {
      if (!CheckPermission(chain.perm, req.caller, Access::kWrite) ||
          !CheckPermission(chain.perm, req.caller, Access::kExec)) {
        reply.status = Code::kAccess;
        break;
      }
      if (rec != nullptr) {
        reply.status = Code::kExist;
        break;
      }
      if (req.mode > kMaxMode) {
        reply.status = Code::kInvalidArgument;
        break;
      }
      InodeRecord created;
      created.key = key;
      uint64_t id = MakeId(id_, id_counter_ + 1);
      created.id = InodeId(id);
      created.perm = Permission{req.mode, req.caller.uid, req.caller.gid};
      created.mtime = req.mtime;
      if (req.op == MetaOp::kMkdir) {
        created.kind = InodeKind::kDirectory;
        created.dir_id = DirectoryId(id);
      }
      apply(Mutation::Put(created));
      if (created.is_dir()) replica_.PutValid(key, created.dir_id, created.perm);
      reply.inode = created;
      break;
    }
    case MetaOp::kOpen:
    case MetaOp::kGetAttr:
      if (rec == nullptr) {
        reply.status = Code::kNoEnt;
      } else {
        reply.inode = *rec;
      }
      break;
    case MetaOp::kClose:
      if (rec == nullptr) {
        reply.status = Code::kNoEnt;
      } else if (rec->is_dir()) {
        reply.status = Code::kIsDir;
      } else {
        InodeRecord updated = *rec;
        updated.size = req.size;
        updated.mtime = req.mtime;
        apply(Mutation::Put(updated));
        reply.inode = updated;
      }
      break;
    case MetaOp::kUnlink:
      if (!CheckPermission(chain.perm, req.caller, Access::kWrite) ||
          !CheckPermission(chain.perm, req.caller, Access::kExec)) {
        reply.status = Code::kAccess;
      } else if (rec == nullptr) {
        reply.status = Code::kNoEnt;
      } else if (rec->is_dir()) {
        reply.status = Code::kIsDir;
      } else {
        reply.inode = *rec;
        apply(Mutation::Erase(key));
      }
      break;
    case MetaOp::kReaddir:
      break;
  }
  return reply;
}

}  // namespace falconmeta
