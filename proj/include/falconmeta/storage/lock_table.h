#pragma once

#include <compare>
#include <coroutine>
#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "falconmeta/model/types.h"
#include "falconmeta/sim/simulator.h"
#include "falconmeta/sim/task.h"

namespace falconmeta {

enum class LockMode : uint8_t { kShared, kExclusive };

// Dentry locks guard the namespace replica, inode locks the inode table.
// All dentry keys sort before all inode keys, so any holder that acquires
// in key order never waits on a dentry while holding an inode lock.
enum class LockSpace : uint8_t { kDentry = 0, kInode = 1 };

struct LockKey {
  LockSpace space = LockSpace::kDentry;
  DentryKey key;

  friend auto operator<=>(const LockKey&, const LockKey&) = default;
  friend bool operator==(const LockKey&, const LockKey&) = default;
};

struct LockRequest {
  LockKey key;
  LockMode mode = LockMode::kShared;
};

// Sorts by key and merges duplicates, keeping the strongest mode.
std::vector<LockRequest> CanonicalLockSet(std::vector<LockRequest> requests);

// FIFO shared/exclusive locks for one node. New requests never overtake
// queued ones. Grants resume waiters through zero-delay events owned by the
// node, so a crash drops them together with the rest of the node's state.
class LockTable {
 public:
  LockTable(sim::Simulator& sim, sim::Address owner) : sim_(sim), owner_(owner) {}

  struct Awaiter {
    LockTable* table;
    LockKey key;
    LockMode mode;
    bool await_ready() { return table->TryGrant(key, mode); }
    void await_suspend(std::coroutine_handle<> h) { table->Enqueue(key, mode, h); }
    void await_resume() const noexcept {}
  };

  Awaiter Acquire(LockKey key, LockMode mode) { return Awaiter{this, std::move(key), mode}; }
  // Acquires a canonical set in order.
  sim::Task<void> AcquireAll(std::vector<LockRequest> set);

  void Release(const LockKey& key, LockMode mode);
  void ReleaseAll(const std::vector<LockRequest>& set);

  bool IsLocked(const LockKey& key) const { return locks_.contains(key); }
  bool IsHeldExclusive(const LockKey& key) const;
  uint64_t acquisitions() const { return acquisitions_; }
  size_t held_keys() const { return locks_.size(); }

  // Crash: every holder and waiter is gone.
  void Reset() { locks_.clear(); }

 private:
  struct Waiter {
    LockMode mode;
    std::coroutine_handle<> handle;
  };
  struct State {
    uint32_t shared = 0;
    bool exclusive = false;
    std::deque<Waiter> waiters;
  };

  static bool Compatible(const State& s, LockMode mode) {
    return mode == LockMode::kShared ? !s.exclusive : (!s.exclusive && s.shared == 0);
  }
  bool TryGrant(const LockKey& key, LockMode mode);
  void Enqueue(const LockKey& key, LockMode mode, std::coroutine_handle<> h);
  void Grant(State& s, LockMode mode);

  sim::Simulator& sim_;
  sim::Address owner_;
  std::map<LockKey, State> locks_;
  uint64_t acquisitions_ = 0;
};

}  // namespace falconmeta
