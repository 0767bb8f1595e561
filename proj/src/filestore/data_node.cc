#include "falconmeta/filestore/data_node.h"

#include <vector>

#include "falconmeta/common/hash.h"

namespace falconmeta {

uint64_t ChunkHash(const ChunkKey& key) {
  ByteWriter w;
  w.PutU64(Raw(key.inode));
  w.PutU32(key.index);
  return Fnv1a64(std::span<const uint8_t>(w.bytes()));
}

Ring BuildDataRing(uint32_t count, uint32_t vnodes) {
  std::vector<NodeId> ids;
  for (uint32_t i = 0; i < count; ++i) ids.push_back(NodeId(i));
  auto ring = Ring::Build(std::move(ids), vnodes);
  return ring.ok() ? std::move(ring).value() : Ring();
}

DataNode::DataNode(sim::Simulator& sim, NodeId id, uint32_t chunk_bytes)
    : sim_(sim), id_(id), chunk_bytes_(chunk_bytes), ep_(sim, DataNodeAddress(id)) {}

size_t DataNode::ChunksOf(InodeId inode) const {
  auto lo = chunks_.lower_bound(ChunkKey{inode, 0});
  size_t n = 0;
  for (auto it = lo; it != chunks_.end() && it->first.inode == inode; ++it) ++n;
  return n;
}

void DataNode::Deliver(sim::Envelope env) {
  auto decoded = rpc::Decode(env.payload);
  if (!decoded.ok()) {
    sim_.counters().Add("rpc.decode_error");
    return;
  }
  rpc::Message msg = std::move(decoded).value();
  const auto* req = std::get_if<rpc::ChunkRequest>(&msg.body);
  if (req == nullptr) return;
  rpc::ChunkReply reply;
  ChunkKey key{req->inode, req->index};
  switch (req->op) {
    case rpc::ChunkOp::kPut:
      if (req->data.size() > chunk_bytes_) {
        reply.status = Code::kInvalidArgument;
      } else {
        chunks_[key] = req->data;
        sim_.counters().Add("chunk.put");
      }
      break;
    case rpc::ChunkOp::kGet: {
      auto it = chunks_.find(key);
      if (it == chunks_.end()) {
        reply.status = Code::kNoChunk;
      } else {
        reply.data = it->second;
      }
      sim_.counters().Add("chunk.get");
      break;
    }
    case rpc::ChunkOp::kDeleteAll: {
      auto lo = chunks_.lower_bound(ChunkKey{req->inode, 0});
      auto hi = lo;
      while (hi != chunks_.end() && hi->first.inode == req->inode) {
        ++hi;
        ++reply.deleted;
      }
      chunks_.erase(lo, hi);
      sim_.counters().Add("chunk.deleted", reply.deleted);
      break;
    }
  }
  ep_.Reply(env.src, msg.req_id, std::move(reply));
}

}  // namespace falconmeta
