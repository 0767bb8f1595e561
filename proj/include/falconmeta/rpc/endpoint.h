#pragma once

#include <coroutine>
#include <memory>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "falconmeta/rpc/messages.h"
#include "falconmeta/sim/simulator.h"

namespace falconmeta::rpc {

inline constexpr uint64_t kDefaultRpcTimeoutNs = 50'000'000;  // 50 ms simulated

// Request/response plumbing for one actor. Calls suspend the calling
// coroutine until every reply arrived or the timeout fired; replies are
// matched by request id, so forwarded requests may be answered by any node.
class Endpoint {
 public:
  Endpoint(sim::Simulator& sim, Address self) : sim_(sim), self_(self) {}

  Address self() const { return self_; }
  sim::Simulator& sim() { return sim_; }

  uint64_t NextRequestId() { return (uint64_t{self_} << 40) | ++next_req_; }

  // Fire-and-forget send; `msg.req_id` must already be set.
  void Send(Address dst, const Message& msg);
  void Reply(Address dst, uint64_t req_id, Payload body, uint64_t table_version = 0);

  // Awaiter state lives on the heap; the awaiter itself is one pointer so
  // that compilers may relocate it freely inside the coroutine frame.
  struct CallState {
    std::vector<std::pair<Address, Message>> calls;
    uint64_t timeout_ns = 0;
    std::vector<std::optional<Message>> results;
    size_t remaining = 0;
    std::coroutine_handle<> handle;
    uint64_t group = 0;
  };

  struct ManyAwaiter {
    Endpoint* ep;
    std::unique_ptr<CallState> state;

    bool await_ready() const noexcept { return state->calls.empty(); }
    void await_suspend(std::coroutine_handle<> h);
    std::vector<std::optional<Message>> await_resume() { return std::move(state->results); }
  };

  struct OneAwaiter {
    ManyAwaiter inner;
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h) { inner.await_suspend(h); }
    std::optional<Message> await_resume() { return std::move(inner.state->results.front()); }
  };

  // Request ids are assigned here; callers leave req_id at zero.
  OneAwaiter Call(Address dst, Payload body, uint64_t table_version = 0,
                  uint64_t timeout_ns = kDefaultRpcTimeoutNs);
  ManyAwaiter CallMany(std::vector<std::pair<Address, Payload>> calls, uint64_t timeout_ns = kDefaultRpcTimeoutNs,
                       uint64_t table_version = 0);

  // Completes a pending call; returns false for unsolicited or late replies.
  bool OnReply(Message&& msg);

  // Crash: forget pending calls without resuming them.
  void Reset() {
    pending_.clear();
    groups_.clear();
  }

  size_t pending() const { return pending_.size(); }

 private:
  struct Slot {
    uint64_t group;
    size_t index;
  };

  sim::Simulator& sim_;
  Address self_;
  uint64_t next_req_ = 0;
  uint64_t next_group_ = 0;
  std::unordered_map<uint64_t, Slot> pending_;
  std::unordered_map<uint64_t, CallState*> groups_;
};

}  // namespace falconmeta::rpc
