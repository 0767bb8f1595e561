#include "falconmeta/mnode/meta_actor.h"

#include <utility>

#include "falconmeta/index/route.h"

namespace falconmeta {

using rpc::Message;
using sim::Address;

MetaActor::MetaActor(sim::Simulator& sim, Address self, NodeConfig config, ClusterView view, ExceptionTable table)
    : sim_(sim),
      self_(self),
      config_(config),
      ep_(sim, self),
      locks_(sim, self),
      torn_rng_(sim.config().seed ^ (uint64_t{self} * 0x9e3779b97f4a7c15ULL)),
      initial_view_(std::move(view)),
      initial_table_(std::move(table)) {}

MetaActor::~MetaActor() { scope_.DestroyAll(); }

void MetaActor::Deliver(sim::Envelope env) {
  auto decoded = rpc::Decode(env.payload);
  if (!decoded.ok()) {
    sim_.counters().Add("rpc.decode_error");
    return;
  }
  Message msg = std::move(decoded).value();
  if (msg.is_reply()) {
    ep_.OnReply(std::move(msg));
    return;
  }
  HandleCommon(std::move(msg), env.src);
}

void MetaActor::HandleCommon(Message msg, Address src) {
  if (auto* q = std::get_if<rpc::DecisionQuery>(&msg.body)) {
    Reply(src, msg.req_id, rpc::DecisionReply{q->txid, TxStateOf(q->txid)});
    return;
  }
  Handle(std::move(msg), src);
}

void MetaActor::OnCrash() {
  scope_.DestroyAll();
  ep_.Reset();
  locks_.Reset();
  replica_.Clear();
  wal_.reset();
  disk_.Crash(config_.torn_writes ? &torn_rng_ : nullptr);
  active_txs_.clear();
  committed_txs_.clear();
  ResetVolatile();
}

void MetaActor::OnRestart() { Recover(); }

void MetaActor::Recover() {
  wal_ = std::make_unique<Wal>(&disk_);
  WalScan scan = ScanWal(disk_.contents());
  ReplayResult replay = ReplayWal(scan.records);
  replay.scan_status = wal_->open_status();
  if (scan.records.empty()) {
    // First boot: persist the initial membership and table.
    Mutation v;
    v.kind = Mutation::Kind::kSetView;
    v.view = initial_view_;
    Mutation t;
    t.kind = Mutation::Kind::kSetTable;
    t.table = initial_table_;
    replay.mutations.push_back(v);
    replay.mutations.push_back(t);
    AppendBatch({v, t});
  }
  for (const auto& m : replay.mutations) ApplyMutation(m);
  committed_txs_ = replay.committed;
  Mutation boot;
  boot.kind = Mutation::Kind::kBoot;
  boot.value = incarnation_ + 1;
  AppendBatch({boot});
  ApplyMutation(boot);
  wal_->Flush();
  sim_.counters().Add("node.recover");
  last_replay_ = replay;
  AfterRecovery(replay);
}

void MetaActor::ApplyMutation(const Mutation& m) {
  switch (m.kind) {
    case Mutation::Kind::kSetTable:
      if (m.table) AdoptTable(*m.table);
      break;
    case Mutation::Kind::kSetView:
      if (m.view) AdoptView(*m.view);
      break;
    case Mutation::Kind::kBoot:
      incarnation_ = m.value;
      break;
    default:
      break;
  }
}

void MetaActor::AfterRecovery(const ReplayResult& replay) {
  for (const auto& [txid, participants] : replay.decisions) {
    scope_.Spawn(NotifyDecision(txid, participants, true));
  }
}

sim::Task<rpc::LookupReply> MetaActor::LookupLocal(DentryKey) {
  rpc::LookupReply r;
  r.status = Code::kNoEnt;
  co_return r;
}

void MetaActor::AppendBatch(const std::vector<Mutation>& muts) {
  wal_->Append(WalKind::kBeginBatch, {});
  for (const auto& m : muts) wal_->Append(WalKind::kOpApply, EncodeValue(m));
  wal_->Append(WalKind::kCommitBatch, {});
}

sim::Task<void> MetaActor::Flush() {
  if (config_.flush_ns > 0) {
    co_await sim::Sleep(sim_, self_, config_.flush_ns);
  }
  wal_->Flush();
  sim_.counters().Add("wal.flush");
}

sim::Task<void> MetaActor::Persist(std::vector<Mutation> muts) {
  AppendBatch(muts);
  for (const auto& m : muts) ApplyMutation(m);
  co_await Flush();
}

sim::Task<void> MetaActor::PersistOne(Mutation m) {
  std::vector<Mutation> muts{std::move(m)};
  co_await Persist(std::move(muts));
}

sim::Task<rpc::LookupReply> MetaActor::FetchDentry(DentryKey key, bool* installed) {
  *installed = false;
  uint64_t issued_gen = replica_.Gen(key);
  NodeId owner = PlacementOwner(ring_, table_, key.pid, key.name);
  rpc::LookupReply reply;
  sim_.counters().Add("lookup.fetch");
  if (Raw(owner) == self_) {
    reply = co_await LookupLocal(key);
  } else {
    sim_.counters().Add("lookup.remote");
    rpc::Payload lookup = rpc::LookupRequest{key};
    std::optional<Message> r = co_await ep_.Call(Raw(owner), std::move(lookup), 0, config_.rpc_timeout_ns);
    if (!r || !std::holds_alternative<rpc::LookupReply>(r->body)) {
      reply.status = Code::kTimeout;
      co_return reply;
    }
    reply = std::get<rpc::LookupReply>(r->body);
  }
  if (reply.status == Code::kOk) {
    *installed = replica_.InstallFetched(key, reply.dir_id, reply.perm, issued_gen);
    if (!*installed) sim_.counters().Add("lookup.discarded");
  }
  co_return reply;
}

sim::Task<MetaActor::Chain> MetaActor::ResolveDirs(std::vector<std::string> components, Credentials who) {
  Chain chain;
  constexpr int kMaxFetchAttempts = 8;
  for (const auto& name : components) {
    if (!CheckPermission(chain.perm, who, Access::kExec)) {
      chain.status = Code::kAccess;
      co_return chain;
    }
    DentryKey key{chain.dir, name};
    std::optional<DentryRecord> rec = replica_.Find(key);
    int attempts = 0;
    while (!rec || rec->state != DentryState::kValid) {
      if (++attempts > kMaxFetchAttempts) {
        chain.status = Code::kTimeout;
        co_return chain;
      }
      bool installed = false;
      rpc::LookupReply reply = co_await FetchDentry(key, &installed);
      if (reply.status != Code::kOk) {
        chain.status = reply.status;
        co_return chain;
      }
      rec = replica_.Find(key);
    }
    chain.keys.push_back(key);
    chain.gens.push_back(rec->gen);
    chain.dir = rec->dir_id;
    chain.perm = rec->perm;
  }
  co_return chain;
}

bool MetaActor::ChainStillValid(const Chain& chain) const {
  for (size_t i = 0; i < chain.keys.size(); ++i) {
    auto rec = replica_.Find(chain.keys[i]);
    if (!rec || rec->state != DentryState::kValid || rec->gen != chain.gens[i]) return false;
  }
  return true;
}

uint64_t MetaActor::NewTxid() { return (incarnation_ << 40) | (uint64_t{self_} << 28) | (++next_tx_ & 0xfffffff); }

rpc::TxState MetaActor::TxStateOf(uint64_t txid) const {
  if (committed_txs_.contains(txid)) return rpc::TxState::kCommitted;
  if (active_txs_.contains(txid)) return rpc::TxState::kPending;
  // Presumed abort: no durable commit record means the transaction aborted.
  return rpc::TxState::kAborted;
}

sim::Task<void> MetaActor::NotifyDecision(uint64_t txid, std::vector<uint32_t> participants, bool commit) {
  std::vector<uint32_t> left = std::move(participants);
  while (!left.empty()) {
    std::vector<std::pair<Address, rpc::Payload>> calls;
    for (uint32_t p : left) calls.emplace_back(p, rpc::DecisionRequest{txid, commit});
    std::vector<std::optional<Message>> acks = co_await ep_.CallMany(std::move(calls), config_.rpc_timeout_ns);
    std::vector<uint32_t> retry;
    for (size_t i = 0; i < left.size(); ++i) {
      if (!acks[i]) retry.push_back(left[i]);
    }
    left = std::move(retry);
    if (!left.empty()) {
      co_await sim::Sleep(sim_, self_, config_.decision_retry_ns);
    }
  }
}

void MetaActor::AdoptTable(const ExceptionTable& t) {
  if (t.version() >= table_.version()) table_ = t;
}

void MetaActor::AdoptView(const ClusterView& v) {
  if (v.epoch >= view_.epoch) {
    view_ = v;
    ring_ = view_.BuildRing();
  }
}

void MetaActor::WakeAll(std::vector<std::coroutine_handle<>>* waiters) {
  std::vector<std::coroutine_handle<>> woken = std::move(*waiters);
  waiters->clear();
  for (auto h : woken) sim_.Schedule(self_, 0, [h] { h.resume(); });
}

}  // namespace falconmeta
