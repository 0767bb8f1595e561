#include "falconmeta/storage/lock_table.h"

#include <algorithm>

namespace falconmeta {

std::vector<LockRequest> CanonicalLockSet(std::vector<LockRequest> requests) {
  std::sort(requests.begin(), requests.end(),
            [](const LockRequest& a, const LockRequest& b) { return a.key < b.key; });
  std::vector<LockRequest> out;
  for (auto& r : requests) {
    if (!out.empty() && out.back().key == r.key) {
      if (r.mode == LockMode::kExclusive) out.back().mode = LockMode::kExclusive;
      continue;
    }
    out.push_back(std::move(r));
  }
  return out;
}

sim::Task<void> LockTable::AcquireAll(std::vector<LockRequest> set) {
  for (const auto& r : set) {
    co_await Acquire(r.key, r.mode);
  }
}

void LockTable::Grant(State& s, LockMode mode) {
  if (mode == LockMode::kShared) {
    ++s.shared;
  } else {
    s.exclusive = true;
  }
  ++acquisitions_;
  sim_.counters().Add("lock.acquire");
}

bool LockTable::TryGrant(const LockKey& key, LockMode mode) {
  State& s = locks_[key];
  if (!s.waiters.empty() || !Compatible(s, mode)) return false;
  Grant(s, mode);
  return true;
}

void LockTable::Enqueue(const LockKey& key, LockMode mode, std::coroutine_handle<> h) {
  sim_.counters().Add("lock.wait");
  locks_[key].waiters.push_back(Waiter{mode, h});
}

bool LockTable::IsHeldExclusive(const LockKey& key) const {
  auto it = locks_.find(key);
  return it != locks_.end() && it->second.exclusive;
}

void LockTable::Release(const LockKey& key, LockMode mode) {
  auto it = locks_.find(key);
  if (it == locks_.end()) return;
  State& s = it->second;
  if (mode == LockMode::kShared) {
    if (s.shared > 0) --s.shared;
  } else {
    s.exclusive = false;
  }
  while (!s.waiters.empty() && Compatible(s, s.waiters.front().mode)) {
    Waiter w = s.waiters.front();
    s.waiters.pop_front();
    Grant(s, w.mode);
    sim_.Schedule(owner_, 0, [h = w.handle] { h.resume(); });
    if (w.mode == LockMode::kExclusive) break;
  }
  if (s.shared == 0 && !s.exclusive && s.waiters.empty()) locks_.erase(it);
}

void LockTable::ReleaseAll(const std::vector<LockRequest>& set) {
  for (auto it = set.rbegin(); it != set.rend(); ++it) Release(it->key, it->mode);
}

}  // namespace falconmeta
