#include <utility>

#include "falconmeta/index/route.h"
#include "falconmeta/mnode/mnode.h"

namespace falconmeta {

using rpc::Message;
using sim::Address;

namespace {

std::vector<LockRequest> TxLocks(const std::vector<rpc::TxOp>& ops) {
  std::vector<LockRequest> out;
  for (const auto& op : ops) {
    if (op.kind != rpc::TxOpKind::kInsert) {
      out.push_back({{LockSpace::kDentry, op.record.key}, LockMode::kExclusive});
    }
    out.push_back({{LockSpace::kInode, op.record.key}, LockMode::kExclusive});
    if (op.kind == rpc::TxOpKind::kMove) out.push_back({{LockSpace::kInode, op.dest}, LockMode::kExclusive});
  }
  return CanonicalLockSet(std::move(out));
}

}  // namespace

void MNode::AfterRecovery(const ReplayResult& replay) {
  MetaActor::AfterRecovery(replay);
  for (const auto& [txid, prepared] : replay.in_doubt) {
    // Nothing else holds locks yet, so these grants complete synchronously.
    ParticipantTx tx{prepared.coordinator, prepared.ops, TxLocks(prepared.ops)};
    for (const auto& l : tx.locks) {
      auto aw = locks_.Acquire(l.key, l.mode);
      (void)aw.await_ready();
    }
    participant_txs_[txid] = std::move(tx);
    sim_.counters().Add("tx.in_doubt");
    scope_.Spawn(WatchTx(txid));
  }
}

// ---- namespace replication ----------------------------------------------------

sim::Task<rpc::LookupReply> MNode::LookupLocal(DentryKey key) {
  rpc::LookupReply reply;
  while (blocked_.contains(key.name)) {
    co_await GateAwaiter{&block_waiters_[key.name]};
  }
  NodeId owner = PlacementOwner(ring_, table_, key.pid, key.name);
  if (owner != id_) {
    // Placement moved since the requester computed it: proxy to the owner.
    rpc::Payload lookup = rpc::LookupRequest{key};
    std::optional<Message> r = co_await ep_.Call(Raw(owner), std::move(lookup), 0, config_.rpc_timeout_ns);
    if (r && std::holds_alternative<rpc::LookupReply>(r->body)) {
      reply = std::get<rpc::LookupReply>(r->body);
    } else {
      reply.status = Code::kTimeout;
    }
    co_return reply;
  }
  LockKey lk{LockSpace::kInode, key};
  co_await locks_.Acquire(lk, LockMode::kShared);
  const InodeRecord* rec = inodes_.Find(key);
  if (rec == nullptr) {
    reply.status = Code::kNoEnt;
  } else if (!rec->is_dir()) {
    reply.status = Code::kNotDir;
  } else {
    reply.dir_id = rec->dir_id;
    reply.perm = rec->perm;
  }
  locks_.Release(lk, LockMode::kShared);
  co_return reply;
}

sim::Task<void> MNode::ServeLookup(Message msg, Address src) {
  DentryKey key = std::get<rpc::LookupRequest>(msg.body).key;
  sim_.counters().Add("lookup.served");
  rpc::LookupReply reply = co_await LookupLocal(std::move(key));
  Reply(src, msg.req_id, reply);
}

sim::Task<void> MNode::ServeInvalidate(Message msg, Address src) {
  rpc::InvalidateRequest req = std::get<rpc::InvalidateRequest>(msg.body);
  sim_.counters().Add("invalidate.handled");
  LockKey lk{LockSpace::kDentry, req.key};
  co_await locks_.Acquire(lk, LockMode::kExclusive);
  if (!config_.skip_invalidation) replica_.Invalidate(req.key);
  bool children = req.check_children && inodes_.HasChildren(req.dir_id);
  locks_.Release(lk, LockMode::kExclusive);
  Reply(src, msg.req_id, rpc::InvalidateReply{children});
}

sim::Task<Code> MNode::BroadcastInvalidation(DentryKey key, DirectoryId dir_id, bool check_children,
                                             bool* children) {
  std::vector<std::pair<Address, rpc::Payload>> calls;
  for (NodeId n : ring_.nodes()) {
    if (n != id_) calls.emplace_back(Raw(n), rpc::InvalidateRequest{key, dir_id, check_children});
  }
  sim_.counters().Add("invalidate.sent", calls.size());
  std::vector<std::optional<Message>> results = co_await ep_.CallMany(std::move(calls), config_.rpc_timeout_ns);
  replica_.Invalidate(key);
  for (const auto& r : results) {
    if (!r || !std::holds_alternative<rpc::InvalidateReply>(r->body)) co_return Code::kTimeout;
    if (std::get<rpc::InvalidateReply>(r->body).children_exist) *children = true;
  }
  co_return Code::kOk;
}

// Owner side of rmdir and setperm. The dentry lock is taken before the inode
// lock, matching the canonical order used by batches on this node.
sim::Task<void> MNode::ServeDirOp(Message msg, Address src) {
  rpc::DirOpRequest req = std::get<rpc::DirOpRequest>(msg.body);
  rpc::DirOpReply reply;
  while (blocked_.contains(req.key.name)) {
    co_await GateAwaiter{&block_waiters_[req.key.name]};
  }
  if (!OwnsPlacement(req.key.pid, req.key.name)) {
    NodeId owner = PlacementOwner(ring_, table_, req.key.pid, req.key.name);
    std::optional<Message> r = co_await ep_.Call(Raw(owner), req, 0, config_.rpc_timeout_ns);
    if (r && std::holds_alternative<rpc::DirOpReply>(r->body)) {
      reply = std::get<rpc::DirOpReply>(r->body);
    } else {
      reply.status = Code::kTimeout;
    }
    Reply(src, msg.req_id, reply);
    co_return;
  }
  std::vector<LockRequest> set = CanonicalLockSet({{{LockSpace::kDentry, req.key}, LockMode::kExclusive},
                                                   {{LockSpace::kInode, req.key}, LockMode::kExclusive}});
  co_await locks_.AcquireAll(set);
  const InodeRecord* found = inodes_.Find(req.key);
  if (found == nullptr) {
    reply.status = Code::kNoEnt;
  } else if (req.op == rpc::GlobalOp::kRmdir) {
    InodeRecord rec = *found;
    if (!rec.is_dir()) {
      reply.status = Code::kNotDir;
    } else {
      bool children = false;
      Code rc = co_await BroadcastInvalidation(rec.key, rec.dir_id, true, &children);
      if (rc != Code::kOk) {
        reply.status = rc;
      } else if (children || inodes_.HasChildren(rec.dir_id)) {
        reply.status = Code::kNotEmpty;
      } else {
        co_await PersistOne(Mutation::Erase(rec.key));
      }
    }
  } else if (req.op == rpc::GlobalOp::kSetPerm) {
    InodeRecord rec = *found;
    bool allowed = req.caller.uid == 0 || (req.caller.uid == rec.perm.uid && req.perm.uid == rec.perm.uid);
    if (!allowed) {
      reply.status = Code::kAccess;
    } else if (req.perm.mode > kMaxMode) {
      reply.status = Code::kInvalidArgument;
    } else {
      Code rc = Code::kOk;
      if (rec.is_dir()) {
        bool unused = false;
        rc = co_await BroadcastInvalidation(rec.key, rec.dir_id, false, &unused);
      }
      if (rc != Code::kOk) {
        reply.status = rc;
      } else {
        rec.perm = req.perm;
        co_await PersistOne(Mutation::Put(rec));
      }
    }
  } else {
    reply.status = Code::kInvalidArgument;
  }
  locks_.ReleaseAll(set);
  Reply(src, msg.req_id, reply);
}

// ---- two-phase commit, participant ------------------------------------------

sim::Task<void> MNode::ServePrepare(Message msg, Address src) {
  rpc::PrepareRequest p = std::get<rpc::PrepareRequest>(msg.body);
  rpc::VoteReply vote;
  vote.txid = p.txid;
  if (participant_txs_.contains(p.txid)) {
    Reply(src, msg.req_id, vote);
    co_return;
  }
  std::vector<LockRequest> set = TxLocks(p.ops);
  co_await locks_.AcquireAll(set);
  std::vector<InodeRecord> dirs;
  for (auto& op : p.ops) {
    const InodeRecord* rec = inodes_.Find(op.record.key);
    if (op.kind == rpc::TxOpKind::kInsert) {
      if (rec != nullptr) vote.status = Code::kExist;
      continue;
    }
    if (rec == nullptr) {
      vote.status = Code::kNoEnt;
      continue;
    }
    if (op.kind == rpc::TxOpKind::kMove && inodes_.Find(op.dest) != nullptr) vote.status = Code::kExist;
    op.record = *rec;
    vote.removed.push_back(*rec);
    if (rec->is_dir()) dirs.push_back(*rec);
  }
  if (vote.status == Code::kOk) {
    for (const auto& d : dirs) {
      bool unused = false;
      Code rc = co_await BroadcastInvalidation(d.key, d.dir_id, false, &unused);
      if (rc != Code::kOk) vote.status = rc;
    }
  }
  if (vote.status != Code::kOk) {
    locks_.ReleaseAll(set);
    vote.removed.clear();
    Reply(src, msg.req_id, vote);
    co_return;
  }
  wal_->Append(WalKind::kPrepare, EncodeValue(p));
  participant_txs_[p.txid] = ParticipantTx{p.coordinator, p.ops, set};
  co_await Flush();
  sim_.counters().Add("tx.prepared");
  Reply(src, msg.req_id, vote);
  scope_.Spawn(WatchTx(p.txid));
}

sim::Task<void> MNode::ServeDecision(Message msg, Address src) {
  rpc::DecisionRequest d = std::get<rpc::DecisionRequest>(msg.body);
  co_await ResolveTx(d.txid, d.commit);
  Reply(src, msg.req_id, rpc::AckReply{d.txid});
}

sim::Task<void> MNode::ResolveTx(uint64_t txid, bool commit) {
  auto it = participant_txs_.find(txid);
  if (it == participant_txs_.end()) co_return;
  ParticipantTx tx = std::move(it->second);
  participant_txs_.erase(it);
  DecisionLog d;
  d.txid = txid;
  wal_->Append(commit ? WalKind::kCommit : WalKind::kAbort, EncodeValue(d));
  if (commit) {
    for (const auto& m : TxOpsToMutations(tx.ops)) ApplyMutation(m);
  }
  sim_.counters().Add(commit ? "tx.committed" : "tx.aborted");
  co_await Flush();
  locks_.ReleaseAll(tx.locks);
}

sim::Task<void> MNode::WatchTx(uint64_t txid) {
  while (true) {
    co_await sim::Sleep(sim_, self_, config_.decision_retry_ns);
    auto it = participant_txs_.find(txid);
    if (it == participant_txs_.end()) co_return;
    Address coordinator = it->second.coordinator;
    sim_.counters().Add("tx.decision_query");
    rpc::Payload query = rpc::DecisionQuery{txid};
    std::optional<Message> r = co_await ep_.Call(coordinator, std::move(query), 0, config_.rpc_timeout_ns);
    if (!r || !std::holds_alternative<rpc::DecisionReply>(r->body)) continue;
    rpc::TxState state = std::get<rpc::DecisionReply>(r->body).state;
    if (state == rpc::TxState::kPending) continue;
    co_await ResolveTx(txid, state == rpc::TxState::kCommitted);
    co_return;
  }
}

// ---- migration ----------------------------------------------------------------

sim::Task<void> MNode::ServeMigrate(Message msg, Address src) {
  rpc::MigrateRequest req = std::get<rpc::MigrateRequest>(msg.body);
  std::set<std::string> names(req.names.begin(), req.names.end());
  auto misplaced = [&] {
    std::map<NodeId, std::vector<DentryKey>> groups;
    for (const auto& [key, rec] : inodes_.records()) {
      if (!req.all && !names.contains(key.name)) continue;
      NodeId owner = PlacementOwner(ring_, table_, key.pid, key.name);
      if (owner != id_) groups[owner].push_back(key);
    }
    return groups;
  };
  constexpr size_t kRecordsPerTx = 512;
  std::map<NodeId, std::vector<DentryKey>> groups = misplaced();
  uint64_t moved = 0;
  for (auto& [dest, keys] : groups) {
    for (size_t i = 0; i < keys.size(); i += kRecordsPerTx) {
      std::vector<DentryKey> chunk(keys.begin() + static_cast<std::ptrdiff_t>(i),
                                   keys.begin() + static_cast<std::ptrdiff_t>(std::min(keys.size(), i + kRecordsPerTx)));
      uint64_t n = co_await MigrateTo(dest, std::move(chunk));
      moved += n;
    }
  }
  uint64_t remaining = 0;
  for (const auto& [_, keys] : misplaced()) remaining += keys.size();
  Reply(src, msg.req_id, rpc::MigrateReply{moved, remaining});
}

sim::Task<uint64_t> MNode::MigrateTo(NodeId dest, std::vector<DentryKey> keys) {
  uint64_t txid = NewTxid();
  active_txs_.insert(txid);
  std::vector<LockRequest> wanted;
  for (const auto& k : keys) wanted.push_back({{LockSpace::kInode, k}, LockMode::kExclusive});
  std::vector<LockRequest> set = CanonicalLockSet(std::move(wanted));
  co_await locks_.AcquireAll(set);
  std::vector<rpc::TxOp> inserts;
  std::vector<rpc::TxOp> removes;
  for (const auto& k : keys) {
    const InodeRecord* rec = inodes_.Find(k);
    if (rec == nullptr || PlacementOwner(ring_, table_, k.pid, k.name) != dest) continue;
    inserts.push_back({rpc::TxOpKind::kInsert, *rec, {}});
    removes.push_back({rpc::TxOpKind::kRemove, *rec, {}});
  }
  if (inserts.empty()) {
    active_txs_.erase(txid);
    locks_.ReleaseAll(set);
    co_return 0;
  }
  rpc::Payload prepare = rpc::PrepareRequest{txid, self_, inserts};
  std::optional<Message> r = co_await ep_.Call(Raw(dest), std::move(prepare), 0, config_.rpc_timeout_ns);
  bool yes = r && std::holds_alternative<rpc::VoteReply>(r->body) &&
             std::get<rpc::VoteReply>(r->body).status == Code::kOk;
  if (!yes) {
    active_txs_.erase(txid);
    locks_.ReleaseAll(set);
    sim_.counters().Add("migrate.aborted");
    if (r) {
      co_return 0;
    }
    // The participant may have prepared; tell it (it would also learn the
    // outcome by querying).
    ep_.Send(Raw(dest), Message{ep_.NextRequestId(), 0, rpc::DecisionRequest{txid, false}});
    co_return 0;
  }
  DecisionLog d{txid, {Raw(dest)}, removes};
  wal_->Append(WalKind::kCommit, EncodeValue(d));
  active_txs_.erase(txid);
  committed_txs_.insert(txid);
  for (const auto& m : TxOpsToMutations(removes)) ApplyMutation(m);
  co_await Flush();
  locks_.ReleaseAll(set);
  sim_.counters().Add("migrate.records", removes.size());
  std::vector<uint32_t> notify{Raw(dest)};
  co_await NotifyDecision(txid, std::move(notify), true);
  co_return removes.size();
}

// ---- control plane --------------------------------------------------------------

sim::Task<void> MNode::ServeControl(Message msg, Address src) {
  if (auto* t = std::get_if<rpc::TablePush>(&msg.body)) {
    if (t->table.version() > table_.version()) {
      Mutation m;
      m.kind = Mutation::Kind::kSetTable;
      m.table = t->table;
      co_await PersistOne(m);
    }
    Reply(src, msg.req_id, rpc::AckReply{table_.version()});
  } else if (auto* v = std::get_if<rpc::ViewPush>(&msg.body)) {
    if (v->view.epoch > view_.epoch) {
      Mutation m;
      m.kind = Mutation::Kind::kSetView;
      m.view = v->view;
      co_await PersistOne(m);
    }
    Reply(src, msg.req_id, rpc::AckReply{view_.epoch});
  } else if (auto* b = std::get_if<rpc::BlockNames>(&msg.body)) {
    Mutation m;
    m.kind = b->block ? Mutation::Kind::kBlockNames : Mutation::Kind::kUnblockNames;
    m.names = b->names;
    co_await PersistOne(m);
    Reply(src, msg.req_id, rpc::AckReply{blocked_.size()});
  } else if (auto* p = std::get_if<rpc::PauseRequest>(&msg.body)) {
    paused_ = p->pause;
    if (!paused_) WakeAll(&pause_waiters_);
    Reply(src, msg.req_id, rpc::AckReply{paused_ ? 1u : 0u});
  } else if (auto* s = std::get_if<rpc::StatsRequest>(&msg.body)) {
    rpc::StatsReport report;
    report.inode_count = inodes_.size();
    report.top = inodes_.TopK(s->k);
    for (const auto& name : s->tracked) report.tracked.push_back({name, inodes_.NameCount(name)});
    Reply(src, msg.req_id, std::move(report));
  } else {
    sim_.counters().Add("mnode.unexpected");
  }
}

}  // namespace falconmeta
