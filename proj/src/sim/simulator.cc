#include "falconmeta/sim/simulator.h"

#include <iterator>

#include "falconmeta/common/hash.h"

namespace falconmeta::sim {

std::string AddressName(Address a) {
  if (a == kCoordinatorAddress) return "coord";
  if (a == kNoOwner) return "harness";
  if (a >= kClientBase) return "c" + std::to_string(a - kClientBase);
  if (a >= kDataNodeBase) return "d" + std::to_string(a - kDataNodeBase);
  return "m" + std::to_string(a);
}

uint64_t Counters::SumEdges(const std::function<bool(Address)>& src, const std::function<bool(Address)>& dst) const {
  uint64_t total = 0;
  for (const auto& [edge, n] : edges_) {
    if (src(edge.first) && dst(edge.second)) total += n;
  }
  return total;
}

std::map<std::string, uint64_t> Counters::Flat() const {
  std::map<std::string, uint64_t> out = named_;
  for (const auto& [edge, n] : edges_) {
    out["msg." + AddressName(edge.first) + "->" + AddressName(edge.second)] = n;
  }
  return out;
}

Simulator::Simulator(Config config) : config_(config), rng_(config.seed) {}

void Simulator::Register(Address addr, Actor* actor) {
  actors_[addr] = actor;
  down_[addr] = false;
  epochs_.try_emplace(addr, 0);
}

void Simulator::Unregister(Address addr) {
  actors_.erase(addr);
  down_[addr] = true;
  ++epochs_[addr];
}

uint64_t Simulator::Send(Address src, Address dst, Bytes payload, std::string_view opcode, uint64_t req_id) {
  uint64_t id = next_msg_id_++;
  counters_.AddEdge(src, dst);
  counters_.Add("msg.total");
  auto link = plan_.links.find({src, dst});
  if (link != plan_.links.end()) {
    bool drop = link->second.partitioned;
    if (!drop && link->second.drop_probability > 0) {
      drop = std::uniform_real_distribution<double>(0, 1)(rng_) < link->second.drop_probability;
    }
    if (drop) {
      counters_.Add("msg.dropped");
      Record("t=" + std::to_string(now_) + " DROP " + AddressName(src) + "→" + AddressName(dst) + " " +
             std::string(opcode) + " " + std::to_string(req_id));
      return id;
    }
  }
  uint64_t latency = config_.min_latency_ns;
  if (config_.jitter_ns > 0) latency += rng_() % (config_.jitter_ns + 1);
  Envelope env{src, dst, now_, now_ + latency, id, opcode, req_id, std::move(payload)};
  deliveries_.emplace(Key{env.deliver_ns, seq_++}, std::move(env));
  return id;
}

void Simulator::Schedule(Address owner, uint64_t delay_ns, std::function<void()> fn) {
  uint64_t epoch = owner == kNoOwner ? 0 : Epoch(owner);
  locals_.emplace(Key{now_ + delay_ns, seq_++}, Local{owner, epoch, std::move(fn)});
}

void Simulator::Crash(Address addr) {
  auto it = actors_.find(addr);
  if (it == actors_.end() || down_[addr]) return;
  down_[addr] = true;
  ++epochs_[addr];
  counters_.Add("node.crash");
  Record("t=" + std::to_string(now_) + " CRASH " + AddressName(addr));
  it->second->OnCrash();
}

void Simulator::Restart(Address addr) {
  auto it = actors_.find(addr);
  if (it == actors_.end() || !down_[addr]) return;
  down_[addr] = false;
  counters_.Add("node.restart");
  Record("t=" + std::to_string(now_) + " RESTART " + AddressName(addr));
  it->second->OnRestart();
}

bool Simulator::IsUp(Address addr) const {
  auto it = down_.find(addr);
  return it != down_.end() && !it->second;
}

uint64_t Simulator::Epoch(Address addr) const {
  auto it = epochs_.find(addr);
  return it == epochs_.end() ? 0 : it->second;
}

void Simulator::SetFaultPlan(FaultPlan plan) {
  plan_ = std::move(plan);
  plan_base_ = delivered_;
  for (const auto& c : plan_.timed_crashes) {
    uint64_t delay = c.at_ns > now_ ? c.at_ns - now_ : 0;
    ScheduleGlobal(delay, [this, c] {
      Crash(c.node);
      if (c.restart_after_ns > 0) ScheduleGlobal(c.restart_after_ns, [this, n = c.node] { Restart(n); });
    });
  }
}

void Simulator::Record(const std::string& line) {
  digest_ = Fnv1a64(line, digest_);
  if (config_.record_trace) trace_.push_back(line);
}

void Simulator::RunLocal(std::map<Key, Local>::iterator it) {
  if (it->first.first > now_) now_ = it->first.first;
  Local ev = std::move(it->second);
  locals_.erase(it);
  if (ev.owner != kNoOwner && (Epoch(ev.owner) != ev.epoch || !IsUp(ev.owner))) return;
  ev.fn();
}

void Simulator::RunDelivery(std::map<Key, Envelope>::iterator it) {
  if (it->first.first > now_) now_ = it->first.first;
  Envelope env = std::move(it->second);
  deliveries_.erase(it);
  auto actor = actors_.find(env.dst);
  if (actor == actors_.end() || !IsUp(env.dst)) {
    counters_.Add("msg.dropped");
    Record("t=" + std::to_string(now_) + " LOST " + AddressName(env.src) + "→" + AddressName(env.dst) + " " +
           std::string(env.opcode) + " " + std::to_string(env.req_id));
    return;
  }
  ++delivered_;
  Record("t=" + std::to_string(now_) + " " + AddressName(env.src) + "→" + AddressName(env.dst) + " " +
         std::string(env.opcode) + " " + std::to_string(env.req_id));
  if (observer_) observer_(env);
  actor->second->Deliver(std::move(env));
  AfterDelivery();
}

void Simulator::AfterDelivery() {
  for (const auto& c : plan_.delivery_crashes) {
    if (delivered_ - plan_base_ == c.delivery) {
      Crash(c.node);
      if (c.restart_after_ns > 0) ScheduleGlobal(c.restart_after_ns, [this, n = c.node] { Restart(n); });
    }
  }
}

bool Simulator::Step() {
  if (chooser_ != nullptr) {
    if (!locals_.empty() && locals_.begin()->first.first <= now_) {
      RunLocal(locals_.begin());
      return true;
    }
    if (!deliveries_.empty()) {
      size_t pick = deliveries_.size() > 1 ? chooser_->Choose(deliveries_.size()) : 0;
      RunDelivery(std::next(deliveries_.begin(), static_cast<std::ptrdiff_t>(pick)));
      return true;
    }
    if (!locals_.empty()) {
      RunLocal(locals_.begin());
      return true;
    }
    return false;
  }
  if (locals_.empty() && deliveries_.empty()) return false;
  if (deliveries_.empty() || (!locals_.empty() && locals_.begin()->first < deliveries_.begin()->first)) {
    RunLocal(locals_.begin());
  } else {
    RunDelivery(deliveries_.begin());
  }
  return true;
}

bool Simulator::RunUntilIdle(uint64_t max_events) {
  for (uint64_t i = 0; i < max_events; ++i) {
    if (!Step()) return true;
  }
  return idle();
}

void Simulator::RunFor(uint64_t duration_ns) {
  uint64_t until = now_ + duration_ns;
  while (true) {
    uint64_t next = UINT64_MAX;
    if (!locals_.empty()) next = locals_.begin()->first.first;
    if (!deliveries_.empty()) next = std::min(next, deliveries_.begin()->first.first);
    if (next > until) break;
    Step();
  }
  if (now_ < until) now_ = until;
}

bool Simulator::RunUntil(const std::function<bool()>& done, uint64_t max_events) {
  for (uint64_t i = 0; i < max_events; ++i) {
    if (done()) return true;
    if (!Step()) return done();
  }
  return done();
}

}  // namespace falconmeta::sim
