#include "falconmeta/rpc/endpoint.h"

namespace falconmeta::rpc {

void Endpoint::Send(Address dst, const Message& msg) {
  sim_.Send(self_, dst, Encode(msg), msg.name(), msg.req_id);
}

void Endpoint::Reply(Address dst, uint64_t req_id, Payload body, uint64_t table_version) {
  Message m{req_id, table_version, std::move(body)};
  Send(dst, m);
}

Endpoint::OneAwaiter Endpoint::Call(Address dst, Payload body, uint64_t table_version, uint64_t timeout_ns) {
  std::vector<std::pair<Address, Message>> calls;
  calls.emplace_back(dst, Message{0, table_version, std::move(body)});
  auto state = std::make_unique<CallState>();
  state->calls = std::move(calls);
  state->timeout_ns = timeout_ns;
  return OneAwaiter{ManyAwaiter{this, std::move(state)}};
}

Endpoint::ManyAwaiter Endpoint::CallMany(std::vector<std::pair<Address, Payload>> calls, uint64_t timeout_ns,
                                         uint64_t table_version) {
  std::vector<std::pair<Address, Message>> msgs;
  msgs.reserve(calls.size());
  for (auto& [dst, body] : calls) msgs.emplace_back(dst, Message{0, table_version, std::move(body)});
  auto state = std::make_unique<CallState>();
  state->calls = std::move(msgs);
  state->timeout_ns = timeout_ns;
  return ManyAwaiter{this, std::move(state)};
}

void Endpoint::ManyAwaiter::await_suspend(std::coroutine_handle<> h) {
  CallState* st = state.get();
  st->handle = h;
  st->results.assign(st->calls.size(), std::nullopt);
  st->remaining = st->calls.size();
  st->group = ++ep->next_group_;
  ep->groups_[st->group] = st;
  for (size_t i = 0; i < st->calls.size(); ++i) {
    auto& [dst, msg] = st->calls[i];
    msg.req_id = ep->NextRequestId();
    ep->pending_[msg.req_id] = Slot{st->group, i};
  }
  for (auto& [dst, msg] : st->calls) ep->Send(dst, msg);
  Endpoint* endpoint = ep;
  uint64_t g = st->group;
  ep->sim_.Schedule(ep->self_, st->timeout_ns, [endpoint, g] {
    auto it = endpoint->groups_.find(g);
    if (it == endpoint->groups_.end()) return;
    CallState* cs = it->second;
    endpoint->groups_.erase(it);
    for (auto& [dst, msg] : cs->calls) endpoint->pending_.erase(msg.req_id);
    endpoint->sim_.counters().Add("rpc.timeout");
    cs->handle.resume();
  });
}

bool Endpoint::OnReply(Message&& msg) {
  auto it = pending_.find(msg.req_id);
  if (it == pending_.end()) return false;
  Slot slot = it->second;
  pending_.erase(it);
  auto g = groups_.find(slot.group);
  if (g == groups_.end()) return false;
  CallState* cs = g->second;
  cs->results[slot.index] = std::move(msg);
  if (--cs->remaining == 0) {
    groups_.erase(g);
    cs->handle.resume();
  }
  return true;
}

}  // namespace falconmeta::rpc
