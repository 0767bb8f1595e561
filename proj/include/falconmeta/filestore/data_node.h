#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "falconmeta/index/ring.h"
#include "falconmeta/rpc/endpoint.h"
#include "falconmeta/sim/simulator.h"

namespace falconmeta {

inline constexpr uint32_t kDefaultChunkBytes = 4u << 20;

struct ChunkKey {
  InodeId inode{0};
  uint32_t index = 0;

  friend auto operator<=>(const ChunkKey&, const ChunkKey&) = default;
};

// FNV-1a 64 over le64(inode) || le32(index).
uint64_t ChunkHash(const ChunkKey& key);

inline sim::Address DataNodeAddress(NodeId n) { return sim::kDataNodeBase + Raw(n); }

// Data ring over data node ids 0..count-1.
Ring BuildDataRing(uint32_t count, uint32_t vnodes = kDefaultVnodes);

// In-memory chunk store. Data is not durable.
class DataNode : public sim::Actor {
 public:
  DataNode(sim::Simulator& sim, NodeId id, uint32_t chunk_bytes = kDefaultChunkBytes);

  void Deliver(sim::Envelope env) override;

  NodeId id() const { return id_; }
  sim::Address address() const { return DataNodeAddress(id_); }
  size_t chunk_count() const { return chunks_.size(); }
  size_t ChunksOf(InodeId inode) const;
  const std::map<ChunkKey, Bytes>& chunks() const { return chunks_; }

 private:
  sim::Simulator& sim_;
  NodeId id_;
  uint32_t chunk_bytes_;
  rpc::Endpoint ep_;
  std::map<ChunkKey, Bytes> chunks_;
};

}  // namespace falconmeta
