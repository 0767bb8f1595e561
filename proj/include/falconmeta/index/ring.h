#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <utility>
#include <vector>

#include "falconmeta/common/bytes.h"
#include "falconmeta/common/status.h"
#include "falconmeta/model/types.h"

namespace falconmeta {

inline constexpr uint32_t kDefaultVnodes = 1000;

// Consistent-hash ring. Virtual node points are splitmix64((node << 32) | i);
// a key hash maps to the owner of the first point at or after it, wrapping.
class Ring {
 public:
  Ring() = default;

  static Result<Ring> Build(std::vector<NodeId> nodes, uint32_t vnodes = kDefaultVnodes);

  NodeId Lookup(uint64_t hash) const;

  const std::vector<NodeId>& nodes() const { return nodes_; }
  uint32_t vnodes() const { return vnodes_; }
  size_t size() const { return nodes_.size(); }
  bool Contains(NodeId n) const;

  // Fraction of the 64-bit hash space owned by each node.
  std::map<NodeId, double> Coverage() const;

  friend bool operator==(const Ring& a, const Ring& b) {
    return a.nodes_ == b.nodes_ && a.vnodes_ == b.vnodes_;
  }

 private:
  std::vector<NodeId> nodes_;  // sorted
  uint32_t vnodes_ = 0;
  std::vector<std::pair<uint64_t, NodeId>> points_;  // sorted by hash point
};

uint64_t VnodePoint(NodeId node, uint32_t index);

// Filename hashing: FNV-1a 64 over the UTF-8 name.
uint64_t NameHash(std::string_view name);
// Path-walk hashing: FNV-1a 64 over le64(pid) || name.
uint64_t NameParentHash(std::string_view name, DirectoryId pid);

NodeId OwnerByName(const Ring& ring, std::string_view name);
NodeId OwnerByNameAndParent(const Ring& ring, std::string_view name, DirectoryId pid);

// Membership snapshot shipped to clients alongside the exception table.
struct ClusterView {
  uint64_t epoch = 0;
  uint32_t vnodes = kDefaultVnodes;
  std::vector<NodeId> nodes;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(epoch, vnodes, nodes);
  }
  Ring BuildRing() const;
};

}  // namespace falconmeta
