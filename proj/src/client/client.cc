#include "falconmeta/client/client.h"

#include <algorithm>
#include <set>
#include <utility>

#include "falconmeta/index/route.h"

namespace falconmeta {

using rpc::Message;
using rpc::MetaOp;

ClientSession::ClientSession(sim::Simulator& sim, uint32_t index, ClientConfig config, ClusterView view,
                             ExceptionTable table)
    : sim_(sim),
      self_(ClientAddress(index)),
      config_(config),
      ep_(sim, ClientAddress(index)),
      view_(std::move(view)),
      ring_(view_.BuildRing()),
      table_(std::move(table)),
      data_ring_(BuildDataRing(config.data_nodes)),
      rng_(config.seed) {}

ClientSession::~ClientSession() { scope_.DestroyAll(); }

void ClientSession::Deliver(sim::Envelope env) {
  auto decoded = rpc::Decode(env.payload);
  if (!decoded.ok()) {
    sim_.counters().Add("rpc.decode_error");
    return;
  }
  Message msg = std::move(decoded).value();
  if (msg.is_reply()) {
    if (!ep_.OnReply(std::move(msg))) sim_.counters().Add("client.late_reply");
  }
}

void ClientSession::Absorb(const std::optional<ExceptionTable>& table, const std::optional<ClusterView>& view) {
  if (view && view->epoch > view_.epoch) {
    view_ = *view;
    ring_ = view_.BuildRing();
  }
  if (table && table->version() > table_.version()) {
    table_ = *table;
    sim_.counters().Add("client.table_adopted");
  }
}

sim::Address ClientSession::ChunkOwner(InodeId inode, uint32_t index) const {
  return DataNodeAddress(data_ring_.Lookup(ChunkHash(ChunkKey{inode, index})));
}

sim::Task<OpResult> ClientSession::SendMeta(MetaOp op, std::string path, uint16_t mode, uint64_t size,
                                            uint64_t mtime) {
  OpResult result;
  auto parsed = PathName::Parse(path);
  if (!parsed.ok()) {
    result.status = parsed.code();
    co_return result;
  }
  rpc::MetaRequest req;
  req.op = op;
  req.path = std::move(path);
  req.caller = config_.creds;
  req.mode = mode;
  req.size = size;
  req.mtime = mtime;
  req.reply_to = self_;
  RouteDecision d = Route(ring_, table_, *parsed);
  NodeId dst = d.node;
  if (d.kind == RouteDecision::Kind::kRandomThenWalk) {
    dst = ring_.nodes()[rng_() % ring_.size()];
  }
  ++requests_;
  sim_.counters().Add("client.requests");
  sim_.counters().Add(std::string("client.op.") + std::string(rpc::MetaOpName(op)));
  std::optional<Message> r = co_await ep_.Call(Raw(dst), req, table_.version(), config_.timeout_ns);
  if (!r || !std::holds_alternative<rpc::MetaReply>(r->body)) {
    result.status = Code::kTimeout;
    co_return result;
  }
  rpc::MetaReply& reply = std::get<rpc::MetaReply>(r->body);
  Absorb(reply.table, reply.view);
  result.status = reply.status;
  result.inode = std::move(reply.inode);
  result.entries = std::move(reply.entries);
  result.hops = reply.hops;
  sim_.counters().Add("client.hops", reply.hops);
  co_return result;
}

sim::Task<OpResult> ClientSession::SendGlobal(rpc::GlobalRequest req) {
  OpResult result;
  req.caller = config_.creds;
  ++requests_;
  sim_.counters().Add("client.requests");
  sim_.counters().Add("client.global");
  std::optional<Message> r = co_await ep_.Call(sim::kCoordinatorAddress, req, table_.version(), config_.timeout_ns);
  if (!r || !std::holds_alternative<rpc::GlobalReply>(r->body)) {
    result.status = Code::kTimeout;
    co_return result;
  }
  const auto& reply = std::get<rpc::GlobalReply>(r->body);
  Absorb(reply.table, reply.view);
  result.status = reply.status;
  result.hops = 1;
  co_return result;
}

sim::Task<OpResult> ClientSession::Mkdir(std::string path, uint16_t mode) {
  co_return co_await SendMeta(MetaOp::kMkdir, std::move(path), mode, 0, 0);
}

sim::Task<OpResult> ClientSession::Create(std::string path, uint16_t mode) {
  co_return co_await SendMeta(MetaOp::kCreate, std::move(path), mode, 0, 0);
}

sim::Task<OpResult> ClientSession::GetAttr(std::string path) {
  co_return co_await SendMeta(MetaOp::kGetAttr, std::move(path), 0, 0, 0);
}

sim::Task<OpResult> ClientSession::Close(std::string path, uint64_t size, uint64_t mtime) {
  co_return co_await SendMeta(MetaOp::kClose, std::move(path), 0, size, mtime);
}

sim::Task<Result<FileHandle>> ClientSession::Open(std::string path) {
  OpResult r = co_await SendMeta(MetaOp::kOpen, path, 0, 0, 0);
  if (!r.ok()) co_return Result<FileHandle>(r.status);
  if (!r.inode || r.inode->is_dir()) co_return Result<FileHandle>(Code::kIsDir);
  co_return FileHandle{std::move(path), r.inode->id, r.inode->size};
}

sim::Task<OpResult> ClientSession::Unlink(std::string path) {
  OpResult r = co_await SendMeta(MetaOp::kUnlink, std::move(path), 0, 0, 0);
  if (!r.ok() || !r.inode || data_ring_.size() == 0) co_return r;
  uint64_t chunks = (r.inode->size + config_.chunk_bytes - 1) / config_.chunk_bytes;
  std::set<sim::Address> holders;
  for (uint64_t i = 0; i < chunks; ++i) holders.insert(ChunkOwner(r.inode->id, static_cast<uint32_t>(i)));
  if (holders.empty()) co_return r;
  std::vector<std::pair<sim::Address, rpc::Payload>> calls;
  for (sim::Address a : holders) {
    calls.emplace_back(a, rpc::ChunkRequest{rpc::ChunkOp::kDeleteAll, r.inode->id, 0, {}});
  }
  co_await ep_.CallMany(std::move(calls), config_.timeout_ns);
  co_return r;
}

sim::Task<OpResult> ClientSession::Readdir(std::string path) {
  OpResult result;
  auto parsed = PathName::Parse(path);
  if (!parsed.ok()) {
    result.status = parsed.code();
    co_return result;
  }
  rpc::MetaRequest req;
  req.op = MetaOp::kReaddir;
  req.path = std::move(path);
  req.caller = config_.creds;
  req.reply_to = self_;
  std::vector<std::pair<sim::Address, rpc::Payload>> calls;
  for (NodeId n : ring_.nodes()) calls.emplace_back(Raw(n), req);
  requests_ += calls.size();
  sim_.counters().Add("client.requests", calls.size());
  sim_.counters().Add("client.op.readdir");
  std::vector<std::optional<Message>> rs = co_await ep_.CallMany(std::move(calls), config_.timeout_ns, table_.version());
  for (auto& r : rs) {
    if (!r || !std::holds_alternative<rpc::MetaReply>(r->body)) {
      result.status = Code::kTimeout;
      continue;
    }
    auto& reply = std::get<rpc::MetaReply>(r->body);
    Absorb(reply.table, reply.view);
    if (reply.status != Code::kOk) {
      if (result.status == Code::kOk) result.status = reply.status;
      continue;
    }
    for (auto& e : reply.entries) result.entries.push_back(std::move(e));
  }
  if (result.status != Code::kOk) {
    result.entries.clear();
    co_return result;
  }
  std::sort(result.entries.begin(), result.entries.end(),
            [](const InodeRecord& a, const InodeRecord& b) { return a.key.name < b.key.name; });
  co_return result;
}

sim::Task<OpResult> ClientSession::Rmdir(std::string path) {
  rpc::GlobalRequest req;
  req.op = rpc::GlobalOp::kRmdir;
  req.path = std::move(path);
  co_return co_await SendGlobal(std::move(req));
}

sim::Task<OpResult> ClientSession::SetPerm(std::string path, Permission perm) {
  rpc::GlobalRequest req;
  req.op = rpc::GlobalOp::kSetPerm;
  req.path = std::move(path);
  req.perm = perm;
  co_return co_await SendGlobal(std::move(req));
}

sim::Task<OpResult> ClientSession::Rename(std::string from, std::string to) {
  rpc::GlobalRequest req;
  req.op = rpc::GlobalOp::kRename;
  req.path = std::move(from);
  req.path2 = std::move(to);
  co_return co_await SendGlobal(std::move(req));
}

sim::Task<OpResult> ClientSession::Write(FileHandle handle, Bytes data, uint64_t mtime) {
  OpResult result;
  if (data_ring_.size() == 0) {
    result.status = Code::kInvalidArgument;
    co_return result;
  }
  std::vector<std::pair<sim::Address, rpc::Payload>> calls;
  for (uint64_t off = 0, i = 0; off < data.size(); off += config_.chunk_bytes, ++i) {
    size_t len = std::min<uint64_t>(config_.chunk_bytes, data.size() - off);
    Bytes chunk(data.begin() + static_cast<std::ptrdiff_t>(off), data.begin() + static_cast<std::ptrdiff_t>(off + len));
    auto idx = static_cast<uint32_t>(i);
    calls.emplace_back(ChunkOwner(handle.inode, idx), rpc::ChunkRequest{rpc::ChunkOp::kPut, handle.inode, idx, std::move(chunk)});
  }
  if (!calls.empty()) {
    std::vector<std::optional<Message>> rs = co_await ep_.CallMany(std::move(calls), config_.timeout_ns);
    for (auto& r : rs) {
      if (!r || !std::holds_alternative<rpc::ChunkReply>(r->body)) {
        result.status = Code::kTimeout;
        co_return result;
      }
      Code c = std::get<rpc::ChunkReply>(r->body).status;
      if (c != Code::kOk) {
        result.status = c;
        co_return result;
      }
    }
  }
  co_return co_await Close(handle.path, data.size(), mtime);
}

sim::Task<OpResult> ClientSession::Read(FileHandle handle) {
  OpResult result;
  if (handle.size == 0) co_return result;
  uint64_t chunks = (handle.size + config_.chunk_bytes - 1) / config_.chunk_bytes;
  std::vector<std::pair<sim::Address, rpc::Payload>> calls;
  for (uint64_t i = 0; i < chunks; ++i) {
    auto idx = static_cast<uint32_t>(i);
    calls.emplace_back(ChunkOwner(handle.inode, idx), rpc::ChunkRequest{rpc::ChunkOp::kGet, handle.inode, idx, {}});
  }
  std::vector<std::optional<Message>> rs = co_await ep_.CallMany(std::move(calls), config_.timeout_ns);
  for (auto& r : rs) {
    if (!r || !std::holds_alternative<rpc::ChunkReply>(r->body)) {
      result.status = Code::kTimeout;
      co_return result;
    }
    auto& reply = std::get<rpc::ChunkReply>(r->body);
    if (reply.status != Code::kOk) {
      result.status = reply.status == Code::kNoChunk ? Code::kShortRead : reply.status;
      co_return result;
    }
    result.data.insert(result.data.end(), reply.data.begin(), reply.data.end());
  }
  if (result.data.size() != handle.size) {
    result.status = Code::kShortRead;
    result.data.clear();
  }
  co_return result;
}

}  // namespace falconmeta
