#pragma once

#include <coroutine>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "falconmeta/common/bytes.h"

namespace falconmeta::sim {

using Address = uint32_t;

// Address plan: MNode i lives at address i.
inline constexpr Address kCoordinatorAddress = 1000;
inline constexpr Address kDataNodeBase = 2000;
inline constexpr Address kClientBase = 10000;
inline constexpr Address kNoOwner = 0xffffffffu;

std::string AddressName(Address a);
inline bool IsMNodeAddress(Address a) { return a < kCoordinatorAddress; }

struct Envelope {
  Address src = 0;
  Address dst = 0;
  uint64_t send_ns = 0;
  uint64_t deliver_ns = 0;
  uint64_t msg_id = 0;
  std::string_view opcode;  // static string owned by the rpc layer
  uint64_t req_id = 0;
  Bytes payload;
};

class Actor {
 public:
  virtual ~Actor() = default;
  virtual void Deliver(Envelope env) = 0;
  // Discard all volatile state. Durable state (the node's disk) survives.
  virtual void OnCrash() {}
  virtual void OnRestart() {}
};

struct LinkFault {
  bool partitioned = false;
  double drop_probability = 0;
};

struct FaultPlan {
  struct TimedCrash {
    Address node = 0;
    uint64_t at_ns = 0;
    uint64_t restart_after_ns = 0;  // 0: stays down
  };
  // Crash `node` immediately after the `delivery`-th message delivery
  // (1-based, counted from when the plan is installed).
  struct DeliveryCrash {
    uint64_t delivery = 0;
    Address node = 0;
    uint64_t restart_after_ns = 0;
  };
  std::vector<TimedCrash> timed_crashes;
  std::vector<DeliveryCrash> delivery_crashes;
  std::map<std::pair<Address, Address>, LinkFault> links;
};

// Flat counter registry. Edge counts are kept separately so per-link
// message accounting stays cheap.
class Counters {
 public:
  void Add(const std::string& name, uint64_t delta = 1) { named_[name] += delta; }
  uint64_t Get(const std::string& name) const {
    auto it = named_.find(name);
    return it == named_.end() ? 0 : it->second;
  }
  void AddEdge(Address src, Address dst) { ++edges_[{src, dst}]; }
  uint64_t Edge(Address src, Address dst) const {
    auto it = edges_.find({src, dst});
    return it == edges_.end() ? 0 : it->second;
  }
  const std::map<std::pair<Address, Address>, uint64_t>& edges() const { return edges_; }
  const std::map<std::string, uint64_t>& named() const { return named_; }

  // Sum of edge counts where both ends satisfy the predicates.
  uint64_t SumEdges(const std::function<bool(Address)>& src, const std::function<bool(Address)>& dst) const;

  // key -> u64 report, edges rendered as "msg.<src>-><dst>".
  std::map<std::string, uint64_t> Flat() const;

 private:
  std::map<std::string, uint64_t> named_;
  std::map<std::pair<Address, Address>, uint64_t> edges_;
};

// Picks one of `n` enabled deliveries; used for exhaustive exploration.
class Chooser {
 public:
  virtual ~Chooser() = default;
  virtual size_t Choose(size_t n) = 0;
};

// Deterministic discrete-event loop. Events run in (time, sequence) order;
// identical (scenario, seed) produce identical traces.
class Simulator {
 public:
  struct Config {
    uint64_t seed = 1;
    uint64_t min_latency_ns = 100'000;
    uint64_t jitter_ns = 20'000;
    bool record_trace = false;
  };

  explicit Simulator(Config config);
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void Register(Address addr, Actor* actor);
  void Unregister(Address addr);

  uint64_t now() const { return now_; }
  const Config& config() const { return config_; }
  std::mt19937_64& rng() { return rng_; }

  uint64_t Send(Address src, Address dst, Bytes payload, std::string_view opcode, uint64_t req_id);

  // Local event owned by `owner`; dropped if the owner crashes first.
  void Schedule(Address owner, uint64_t delay_ns, std::function<void()> fn);
  // Harness event, never dropped.
  void ScheduleGlobal(uint64_t delay_ns, std::function<void()> fn) { Schedule(kNoOwner, delay_ns, std::move(fn)); }

  void Crash(Address addr);
  void Restart(Address addr);
  bool IsUp(Address addr) const;
  uint64_t Epoch(Address addr) const;

  void SetFaultPlan(FaultPlan plan);
  void SetChooser(Chooser* chooser) { chooser_ = chooser; }
  // Called for every delivered envelope, before the destination handles it.
  void SetObserver(std::function<void(const Envelope&)> fn) { observer_ = std::move(fn); }

  bool Step();
  // Returns false if `max_events` was exhausted before the queue drained.
  bool RunUntilIdle(uint64_t max_events = UINT64_MAX);
  void RunFor(uint64_t duration_ns);
  bool RunUntil(const std::function<bool()>& done, uint64_t max_events = UINT64_MAX);

  bool idle() const { return locals_.empty() && deliveries_.empty(); }
  uint64_t pending_deliveries() const { return deliveries_.size(); }
  uint64_t deliveries() const { return delivered_; }

  Counters& counters() { return counters_; }
  const Counters& counters() const { return counters_; }
  uint64_t trace_digest() const { return digest_; }
  const std::vector<std::string>& trace() const { return trace_; }

 private:
  struct Local {
    Address owner;
    uint64_t epoch;
    std::function<void()> fn;
  };
  using Key = std::pair<uint64_t, uint64_t>;  // (time, seq)

  void RunLocal(std::map<Key, Local>::iterator it);
  void RunDelivery(std::map<Key, Envelope>::iterator it);
  void Record(const std::string& line);
  void AfterDelivery();

  Config config_;
  std::mt19937_64 rng_;
  uint64_t now_ = 0;
  uint64_t seq_ = 0;
  uint64_t next_msg_id_ = 1;
  uint64_t delivered_ = 0;
  uint64_t plan_base_ = 0;
  std::map<Key, Local> locals_;
  std::map<Key, Envelope> deliveries_;
  std::unordered_map<Address, Actor*> actors_;
  std::unordered_map<Address, uint64_t> epochs_;
  std::unordered_map<Address, bool> down_;
  FaultPlan plan_;
  Chooser* chooser_ = nullptr;
  std::function<void(const Envelope&)> observer_;
  Counters counters_;
  uint64_t digest_ = 0xcbf29ce484222325ULL;
  std::vector<std::string> trace_;
};

// Awaitable timer bound to the sleeping actor's epoch.
struct SleepAwaiter {
  Simulator* sim;
  Address owner;
  uint64_t delay_ns;
  bool await_ready() const noexcept { return false; }
  void await_suspend(std::coroutine_handle<> h) const {
    sim->Schedule(owner, delay_ns, [h] { h.resume(); });
  }
  void await_resume() const noexcept {}
};

inline SleepAwaiter Sleep(Simulator& sim, Address owner, uint64_t delay_ns) { return {&sim, owner, delay_ns}; }

}  // namespace falconmeta::sim
