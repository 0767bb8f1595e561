#include "falconmeta/coordinator/coordinator.h"

#include <algorithm>
#include <utility>

#include "falconmeta/index/route.h"

namespace falconmeta {

using rpc::Message;
using sim::Address;

Coordinator::Coordinator(sim::Simulator& sim, NodeConfig config, ClusterView view, ExceptionTable table)
    : MetaActor(sim, sim::kCoordinatorAddress, config, std::move(view), std::move(table)),
      rng_seed_(sim.config().seed ^ 0xc0041d1ULL) {
  Recover();
}

void Coordinator::ResetVolatile() {
  control_waiters_.clear();
  control_busy_ = false;
  migrating_.clear();
  migrating_waiters_.clear();
  paused_ = false;
  pause_waiters_.clear();
}

void Coordinator::ApplyMutation(const Mutation& m) {
  // Block records here mark a publish in progress.
  if (m.kind == Mutation::Kind::kBlockNames) {
    migrating_.insert(m.names.begin(), m.names.end());
  } else if (m.kind == Mutation::Kind::kUnblockNames) {
    for (const auto& n : m.names) migrating_.erase(n);
    WakeAll(&migrating_waiters_);
  } else {
    MetaActor::ApplyMutation(m);
  }
}

void Coordinator::AfterRecovery(const ReplayResult& replay) {
  MetaActor::AfterRecovery(replay);
  if (!migrating_.empty()) {
    std::vector<std::string> names(migrating_.begin(), migrating_.end());
    scope_.Spawn(FinishPublish(std::move(names)));
  }
}

std::vector<Address> Coordinator::MNodeAddresses() const {
  std::vector<Address> out;
  for (NodeId n : ring_.nodes()) out.push_back(Raw(n));
  return out;
}

void Coordinator::Handle(Message msg, Address src) {
  if (std::holds_alternative<rpc::GlobalRequest>(msg.body)) {
    scope_.Spawn(ServeGlobal(std::move(msg), src));
  } else {
    sim_.counters().Add("coord.unexpected");
  }
}

// ---- global namespace operations ----------------------------------------------

sim::Task<void> Coordinator::ServeGlobal(Message msg, Address src) {
  rpc::GlobalRequest req = std::get<rpc::GlobalRequest>(msg.body);
  sim_.counters().Add("coord.requests");
  while (paused_) {
    co_await GateAwaiter{&pause_waiters_};
  }
  Code status = Code::kOk;
  if (req.op == rpc::GlobalOp::kRename) {
    status = co_await DoRename(req);
  } else {
    status = co_await DoRmdirOrSetPerm(req);
  }
  rpc::GlobalReply reply;
  reply.status = status;
  if (StaleTable(msg.table_version)) {
    reply.table = table_;
    reply.view = view_;
  }
  Reply(src, msg.req_id, std::move(reply));
}

sim::Task<Code> Coordinator::DoRmdirOrSetPerm(rpc::GlobalRequest req) {
  auto parsed = PathName::Parse(req.path);
  if (!parsed.ok()) co_return parsed.code();
  PathName path = *parsed;
  // The root directory is immutable.
  if (path.is_root()) co_return Code::kAccess;
  const bool rmdir = req.op == rpc::GlobalOp::kRmdir;
  constexpr int kMaxAttempts = 16;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    while (migrating_.contains(path.leaf())) {
      co_await GateAwaiter{&migrating_waiters_};
    }
    std::vector<std::string> parents(path.parent_components().begin(), path.parent_components().end());
    Chain chain = co_await ResolveDirs(std::move(parents), req.caller);
    if (chain.status != Code::kOk) co_return chain.status;
    if (!CheckPermission(chain.perm, req.caller, Access::kExec)) co_return Code::kAccess;
    if (rmdir && !CheckPermission(chain.perm, req.caller, Access::kWrite)) co_return Code::kAccess;
    DentryKey key{chain.dir, path.leaf()};
    std::vector<LockRequest> wanted;
    for (const auto& k : chain.keys) wanted.push_back({{LockSpace::kDentry, k}, LockMode::kShared});
    wanted.push_back({{LockSpace::kDentry, key}, LockMode::kExclusive});
    std::vector<LockRequest> set = CanonicalLockSet(std::move(wanted));
    co_await locks_.AcquireAll(set);
    if (!ChainStillValid(chain) || migrating_.contains(path.leaf())) {
      locks_.ReleaseAll(set);
      continue;
    }
    NodeId owner = PlacementOwner(ring_, table_, key.pid, key.name);
    rpc::DirOpRequest dreq{req.op, key, req.perm, req.caller};
    std::optional<Message> r = co_await ep_.Call(Raw(owner), dreq, 0, config_.rpc_timeout_ns);
    Code status = Code::kTimeout;
    if (r && std::holds_alternative<rpc::DirOpReply>(r->body)) status = std::get<rpc::DirOpReply>(r->body).status;
    if (status == Code::kOk && (rmdir || replica_.Find(key).has_value())) replica_.Invalidate(key);
    locks_.ReleaseAll(set);
    co_return status;
  }
  co_return Code::kTimeout;
}

sim::Task<Code> Coordinator::DoRename(rpc::GlobalRequest req) {
  auto pa = PathName::Parse(req.path);
  if (!pa.ok()) co_return pa.code();
  auto pb = PathName::Parse(req.path2);
  if (!pb.ok()) co_return pb.code();
  PathName a = *pa;
  PathName b = *pb;
  if (a.is_root() || b.is_root()) co_return Code::kInvalidRename;
  if (a == b) co_return Code::kOk;
  if (a.IsPrefixOf(b)) co_return Code::kInvalidRename;
  constexpr int kMaxAttempts = 16;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    while (migrating_.contains(a.leaf()) || migrating_.contains(b.leaf())) {
      co_await GateAwaiter{&migrating_waiters_};
    }
    std::vector<std::string> pa_dirs(a.parent_components().begin(), a.parent_components().end());
    std::vector<std::string> pb_dirs(b.parent_components().begin(), b.parent_components().end());
    Chain ca = co_await ResolveDirs(std::move(pa_dirs), req.caller);
    if (ca.status != Code::kOk) co_return ca.status;
    Chain cb = co_await ResolveDirs(std::move(pb_dirs), req.caller);
    if (cb.status != Code::kOk) co_return cb.status;
    for (const Chain* c : {&ca, &cb}) {
      if (!CheckPermission(c->perm, req.caller, Access::kWrite) ||
          !CheckPermission(c->perm, req.caller, Access::kExec)) {
        co_return Code::kAccess;
      }
    }
    DentryKey ka{ca.dir, a.leaf()};
    DentryKey kb{cb.dir, b.leaf()};
    std::vector<LockRequest> wanted;
    for (const Chain* c : {&ca, &cb}) {
      for (const auto& k : c->keys) wanted.push_back({{LockSpace::kDentry, k}, LockMode::kShared});
    }
    wanted.push_back({{LockSpace::kDentry, ka}, LockMode::kExclusive});
    wanted.push_back({{LockSpace::kDentry, kb}, LockMode::kExclusive});
    std::vector<LockRequest> set = CanonicalLockSet(std::move(wanted));
    co_await locks_.AcquireAll(set);
    if (!ChainStillValid(ca) || !ChainStillValid(cb) || migrating_.contains(a.leaf()) ||
        migrating_.contains(b.leaf())) {
      locks_.ReleaseAll(set);
      continue;
    }

    NodeId owner_a = PlacementOwner(ring_, table_, ka.pid, ka.name);
    NodeId owner_b = PlacementOwner(ring_, table_, kb.pid, kb.name);
    uint64_t txid = NewTxid();
    active_txs_.insert(txid);
    sim_.counters().Add("rename.tx");
    Code status = Code::kOk;
    std::vector<uint32_t> prepared;
    std::vector<uint32_t> contacted;
    InodeRecord moved;
    if (owner_a == owner_b) {
      rpc::TxOp op{rpc::TxOpKind::kMove, InodeRecord{}, kb};
      op.record.key = ka;
      rpc::PrepareRequest p{txid, self_, {op}};
      contacted.push_back(Raw(owner_a));
      std::optional<Message> r = co_await ep_.Call(Raw(owner_a), p, 0, config_.rpc_timeout_ns);
      status = Code::kTimeout;
      if (r && std::holds_alternative<rpc::VoteReply>(r->body)) {
        const auto& v = std::get<rpc::VoteReply>(r->body);
        status = v.status;
        if (status == Code::kOk && !v.removed.empty()) moved = v.removed.front();
      }
      if (status == Code::kOk) prepared.push_back(Raw(owner_a));
    } else {
      rpc::TxOp rm{rpc::TxOpKind::kRemove, InodeRecord{}, {}};
      rm.record.key = ka;
      rpc::PrepareRequest pa_req{txid, self_, {rm}};
      contacted.push_back(Raw(owner_a));
      std::optional<Message> r1 = co_await ep_.Call(Raw(owner_a), pa_req, 0, config_.rpc_timeout_ns);
      status = Code::kTimeout;
      if (r1 && std::holds_alternative<rpc::VoteReply>(r1->body)) {
        const auto& v = std::get<rpc::VoteReply>(r1->body);
        status = v.status;
        if (status == Code::kOk && !v.removed.empty()) moved = v.removed.front();
      }
      if (status == Code::kOk) {
        prepared.push_back(Raw(owner_a));
        InodeRecord inserted = moved;
        inserted.key = kb;
        rpc::TxOp ins{rpc::TxOpKind::kInsert, inserted, {}};
        rpc::PrepareRequest pb_req{txid, self_, {ins}};
        contacted.push_back(Raw(owner_b));
        std::optional<Message> r2 = co_await ep_.Call(Raw(owner_b), pb_req, 0, config_.rpc_timeout_ns);
        status = Code::kTimeout;
        if (r2 && std::holds_alternative<rpc::VoteReply>(r2->body)) status = std::get<rpc::VoteReply>(r2->body).status;
        if (status == Code::kOk) prepared.push_back(Raw(owner_b));
      }
    }

    if (status == Code::kOk) {
      DecisionLog d{txid, prepared, {}};
      wal_->Append(WalKind::kCommit, EncodeValue(d));
      active_txs_.erase(txid);
      committed_txs_.insert(txid);
      co_await Flush();
      if (moved.is_dir()) replica_.Invalidate(ka);
      co_await NotifyDecision(txid, prepared, true);
    } else {
      active_txs_.erase(txid);
      sim_.counters().Add("rename.aborted");
      for (uint32_t p : contacted) {
        ep_.Send(p, Message{ep_.NextRequestId(), 0, rpc::DecisionRequest{txid, false}});
      }
    }
    locks_.ReleaseAll(set);
    co_return status;
  }
  co_return Code::kTimeout;
}

// ---- control plane ----------------------------------------------------------------

sim::Task<void> Coordinator::AcquireControl() {
  while (control_busy_) {
    co_await GateAwaiter{&control_waiters_};
  }
  control_busy_ = true;
}

void Coordinator::ReleaseControl() {
  control_busy_ = false;
  WakeAll(&control_waiters_);
}

sim::Task<std::vector<Message>> Coordinator::CallAll(std::vector<Address> dsts, rpc::Payload body) {
  std::vector<Message> out(dsts.size());
  std::vector<size_t> left(dsts.size());
  for (size_t i = 0; i < dsts.size(); ++i) left[i] = i;
  while (!left.empty()) {
    std::vector<std::pair<Address, rpc::Payload>> calls;
    for (size_t i : left) calls.emplace_back(dsts[i], body);
    std::vector<std::optional<Message>> rs = co_await ep_.CallMany(std::move(calls), config_.rpc_timeout_ns);
    std::vector<size_t> retry;
    for (size_t j = 0; j < left.size(); ++j) {
      if (rs[j]) {
        out[left[j]] = std::move(*rs[j]);
      } else {
        retry.push_back(left[j]);
      }
    }
    left = std::move(retry);
    if (!left.empty()) {
      co_await sim::Sleep(sim_, self_, config_.decision_retry_ns);
    }
  }
  co_return out;
}

sim::Task<ClusterStats> Coordinator::GatherStats() {
  rpc::StatsRequest req;
  req.k = static_cast<uint16_t>(std::min<uint32_t>(ReportSize(ring_.size()), 0xffff));
  for (const auto& [name, _] : table_.entries()) req.tracked.push_back(name);
  std::vector<Address> nodes = MNodeAddresses();
  std::vector<Message> rs = co_await CallAll(nodes, req);
  ClusterStats stats;
  for (size_t i = 0; i < nodes.size(); ++i) {
    NodeStats ns;
    ns.node = NodeId(nodes[i]);
    if (const auto* rep = std::get_if<rpc::StatsReport>(&rs[i].body)) {
      ns.inode_count = rep->inode_count;
      ns.top = rep->top;
      for (const auto& t : rep->tracked) ns.tracked[t.name] = t.count;
    }
    stats.nodes.push_back(std::move(ns));
  }
  sim_.counters().Add("coord.stats_rounds");
  co_return stats;
}

sim::Task<void> Coordinator::MigrateAll(std::vector<Address> nodes, std::vector<std::string> names, bool all) {
  std::vector<Address> left = std::move(nodes);
  while (!left.empty()) {
    rpc::MigrateRequest req{names, all};
    std::vector<Message> rs = co_await CallAll(left, req);
    std::vector<Address> again;
    for (size_t i = 0; i < left.size(); ++i) {
      const auto* rep = std::get_if<rpc::MigrateReply>(&rs[i].body);
      if (rep == nullptr || rep->remaining > 0) again.push_back(left[i]);
    }
    left = std::move(again);
    if (!left.empty()) {
      co_await sim::Sleep(sim_, self_, config_.decision_retry_ns);
    }
  }
}

sim::Task<void> Coordinator::Publish(ExceptionTable next, std::vector<std::string> names) {
  std::vector<Address> nodes = MNodeAddresses();
  Mutation block;
  block.kind = Mutation::Kind::kBlockNames;
  block.names = names;
  Mutation set_table;
  set_table.kind = Mutation::Kind::kSetTable;
  set_table.table = next;
  std::vector<Mutation> muts{block, set_table};
  co_await Persist(std::move(muts));
  if (!names.empty()) {
    rpc::Payload block = rpc::BlockNames{names, true};
    co_await CallAll(nodes, std::move(block));
  }
  rpc::Payload push = rpc::TablePush{next};
  co_await CallAll(nodes, std::move(push));
  sim_.counters().Add("coord.table_push");
  co_await FinishPublish(std::move(names));
}

sim::Task<void> Coordinator::FinishPublish(std::vector<std::string> names) {
  std::vector<Address> nodes = MNodeAddresses();
  // Resent after a coordinator restart; both messages are idempotent.
  rpc::Payload push = rpc::TablePush{table_};
  co_await CallAll(nodes, std::move(push));
  if (!names.empty()) {
    co_await MigrateAll(nodes, names, false);
    rpc::Payload unblock_body = rpc::BlockNames{names, false};
    co_await CallAll(nodes, std::move(unblock_body));
  }
  Mutation unblock;
  unblock.kind = Mutation::Kind::kUnblockNames;
  unblock.names = std::move(names);
  co_await PersistOne(std::move(unblock));
}

sim::Task<void> Coordinator::RunRebalance(double epsilon, uint32_t max_epochs, Done done) {
  co_await AcquireControl();
  RebalanceOutcome outcome;
  bool balanced = false;
  for (uint32_t epoch = 0; epoch <= max_epochs; ++epoch) {
    ClusterStats stats = co_await GatherStats();
    outcome.max_share = stats.MaxShare();
    double bound = 1.0 / static_cast<double>(std::max<size_t>(stats.nodes.size(), 1)) + epsilon;
    if (stats.total() == 0 || outcome.max_share <= bound) {
      balanced = true;
      break;
    }
    if (epoch == max_epochs) break;
    RebalancePlan plan = Rebalance(stats, table_, epsilon);
    if (plan.steps.empty()) {
      outcome.status = plan.status;
      break;
    }
    std::vector<std::string> names;
    for (const auto& s : plan.steps) names.push_back(s.name);
    ExceptionTable next = plan.Apply(table_);
    outcome.plans.push_back(std::move(plan));
    ++outcome.epochs;
    co_await Publish(std::move(next), std::move(names));
  }
  if (!balanced && outcome.status.ok()) outcome.status = Status(Code::kUnbalanceable, "epoch limit reached");
  ReleaseControl();
  if (done) done(outcome);
}

sim::Task<void> Coordinator::RunShrink(double epsilon, Done done) {
  co_await AcquireControl();
  RebalanceOutcome outcome;
  ClusterStats stats = co_await GatherStats();
  std::mt19937_64 rng(rng_seed_ ^ table_.version());
  ExceptionTable next = ShrinkTable(table_, stats, ring_, epsilon, rng);
  if (next.version() != table_.version()) {
    std::vector<std::string> removed;
    for (const auto& [name, _] : table_.entries()) {
      if (next.Find(name) == nullptr) removed.push_back(name);
    }
    co_await Publish(std::move(next), std::move(removed));
    ++outcome.epochs;
  }
  ClusterStats after = co_await GatherStats();
  outcome.max_share = after.MaxShare();
  ReleaseControl();
  if (done) done(outcome);
}

sim::Task<void> Coordinator::RunPublish(ExceptionTable table, Done done) {
  co_await AcquireControl();
  std::vector<std::string> names;
  for (const auto& [name, e] : table.entries()) {
    const ExceptionEntry* old = table_.Find(name);
    if (old == nullptr || !(*old == e)) names.push_back(name);
  }
  for (const auto& [name, _] : table_.entries()) {
    if (table.Find(name) == nullptr) names.push_back(name);
  }
  ExceptionTable next = table.WithVersion(std::max(table.version(), table_.version() + 1));
  co_await Publish(std::move(next), std::move(names));
  RebalanceOutcome outcome;
  ReleaseControl();
  if (done) done(outcome);
}

sim::Task<void> Coordinator::RunReconfigure(std::vector<NodeId> nodes, Done done) {
  co_await AcquireControl();
  paused_ = true;
  std::vector<Address> old_nodes = MNodeAddresses();
  std::set<Address> everyone(old_nodes.begin(), old_nodes.end());
  for (NodeId n : nodes) everyone.insert(Raw(n));
  std::vector<Address> all(everyone.begin(), everyone.end());
  rpc::Payload pause = rpc::PauseRequest{true};
  co_await CallAll(all, std::move(pause));

  ClusterView next_view{view_.epoch + 1, view_.vnodes, nodes};
  std::sort(next_view.nodes.begin(), next_view.nodes.end());
  ExceptionTable next_table = table_.WithVersion(table_.version() + 1);
  Mutation v;
  v.kind = Mutation::Kind::kSetView;
  v.view = next_view;
  Mutation t;
  t.kind = Mutation::Kind::kSetTable;
  t.table = next_table;
  std::vector<Mutation> muts{v, t};
  co_await Persist(std::move(muts));
  rpc::Payload view_push = rpc::ViewPush{next_view};
  co_await CallAll(all, std::move(view_push));
  rpc::Payload table_push = rpc::TablePush{next_table};
  co_await CallAll(all, std::move(table_push));
  co_await MigrateAll(old_nodes, {}, true);
  rpc::Payload resume = rpc::PauseRequest{false};
  co_await CallAll(all, std::move(resume));
  paused_ = false;
  WakeAll(&pause_waiters_);
  sim_.counters().Add("coord.reconfigure");
  RebalanceOutcome outcome;
  ReleaseControl();
  if (done) done(outcome);
}

sim::Task<void> Coordinator::AutoRebalance(double epsilon, uint64_t period_ns) {
  while (true) {
    co_await sim::Sleep(sim_, self_, period_ns);
    co_await RunRebalance(epsilon, 1, nullptr);
  }
}

void Coordinator::StartRebalance(double epsilon, uint32_t max_epochs, Done done) {
  scope_.Spawn(RunRebalance(epsilon, max_epochs, std::move(done)));
}

void Coordinator::StartShrink(double epsilon, Done done) { scope_.Spawn(RunShrink(epsilon, std::move(done))); }

void Coordinator::StartPublish(ExceptionTable table, Done done) {
  scope_.Spawn(RunPublish(std::move(table), std::move(done)));
}

void Coordinator::StartReconfigure(std::vector<NodeId> nodes, Done done) {
  scope_.Spawn(RunReconfigure(std::move(nodes), std::move(done)));
}

void Coordinator::EnableAutoRebalance(double epsilon, uint64_t period_ns) {
  scope_.Spawn(AutoRebalance(epsilon, period_ns));
}

}  // namespace falconmeta
