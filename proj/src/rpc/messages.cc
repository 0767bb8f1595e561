#include "falconmeta/rpc/messages.h"

#include <array>
#include <utility>

namespace falconmeta::rpc {

std::string_view MetaOpName(MetaOp op) {
  switch (op) {
    case MetaOp::kMkdir: return "mkdir";
    case MetaOp::kCreate: return "create";
    case MetaOp::kOpen: return "open";
    case MetaOp::kGetAttr: return "getattr";
    case MetaOp::kUnlink: return "unlink";
    case MetaOp::kClose: return "close";
    case MetaOp::kReaddir: return "readdir";
  }
  return "?";
}

bool IsMutation(MetaOp op) {
  return op == MetaOp::kMkdir || op == MetaOp::kCreate || op == MetaOp::kUnlink || op == MetaOp::kClose;
}

namespace {

void PutNameCounts(ByteWriter& w, const std::vector<NameCount>& list) {
  w.PutU16(static_cast<uint16_t>(list.size()));
  for (const auto& nc : list) {
    w.PutU16(static_cast<uint16_t>(nc.name.size()));
    w.PutRaw(nc.name);
    w.PutU64(nc.count);
  }
}

std::vector<NameCount> GetNameCounts(ByteReader& r) {
  uint16_t n = r.GetU16();
  std::vector<NameCount> list;
  for (uint16_t i = 0; i < n && r.ok(); ++i) {
    NameCount nc;
    nc.name = r.GetString(r.GetU16());
    nc.count = r.GetU64();
    list.push_back(std::move(nc));
  }
  return list;
}

template <typename T>
constexpr bool kIsReply =
    std::is_same_v<T, MetaReply> || std::is_same_v<T, GlobalReply> || std::is_same_v<T, LookupReply> ||
    std::is_same_v<T, DirOpReply> || std::is_same_v<T, InvalidateReply> || std::is_same_v<T, VoteReply> ||
    std::is_same_v<T, AckReply> || std::is_same_v<T, DecisionReply> || std::is_same_v<T, MigrateReply> ||
    std::is_same_v<T, StatsReport> || std::is_same_v<T, ChunkReply>;

template <size_t I>
Payload DecodeAlternative(ByteReader& r) {
  std::variant_alternative_t<I, Payload> body{};
  Decoder dec(r);
  dec(body);
  return Payload(std::in_place_index<I>, std::move(body));
}

template <size_t... Is>
constexpr auto MakeDecoders(std::index_sequence<Is...>) {
  return std::array<Payload (*)(ByteReader&), sizeof...(Is)>{&DecodeAlternative<Is>...};
}

constexpr auto kDecoders = MakeDecoders(std::make_index_sequence<std::variant_size_v<Payload>>());

}  // namespace

void StatsReport::EncodeTo(ByteWriter& w) const {
  w.PutU64(inode_count);
  PutNameCounts(w, top);
  PutNameCounts(w, tracked);
}

StatsReport StatsReport::DecodeFrom(ByteReader& r) {
  StatsReport s;
  s.inode_count = r.GetU64();
  s.top = GetNameCounts(r);
  s.tracked = GetNameCounts(r);
  return s;
}

std::string_view Message::name() const {
  return std::visit([](const auto& b) { return std::decay_t<decltype(b)>::kName; }, body);
}

bool Message::is_reply() const {
  return std::visit([](const auto& b) { return kIsReply<std::decay_t<decltype(b)>>; }, body);
}

Bytes Encode(const Message& msg) {
  ByteWriter w;
  w.PutU8(msg.opcode());
  w.PutU64(msg.req_id);
  w.PutU64(msg.table_version);
  Encoder enc(w);
  std::visit([&](const auto& b) { enc(b); }, msg.body);
  return w.Release();
}

Result<Message> Decode(std::span<const uint8_t> data) {
  ByteReader r(data);
  uint8_t op = r.GetU8();
  Message msg;
  msg.req_id = r.GetU64();
  msg.table_version = r.GetU64();
  if (!r.ok()) return Status(Code::kCodecError, "truncated header");
  if (op >= kDecoders.size()) return Status(Code::kCodecError, "unknown opcode");
  msg.body = kDecoders[op](r);
  if (!r.ok()) return Status(Code::kCodecError, "truncated payload");
  if (r.remaining() != 0) return Status(Code::kCodecError, "trailing bytes");
  return msg;
}

}  // namespace falconmeta::rpc
