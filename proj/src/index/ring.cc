#include "falconmeta/index/ring.h"

#include <algorithm>

#include "falconmeta/common/hash.h"

namespace falconmeta {

uint64_t VnodePoint(NodeId node, uint32_t index) {
  return SplitMix64((uint64_t{Raw(node)} << 32) | index);
}

Result<Ring> Ring::Build(std::vector<NodeId> nodes, uint32_t vnodes) {
  if (nodes.empty()) return Status(Code::kEmptyCluster, "no nodes");
  if (vnodes == 0) return Status(Code::kInvalidArgument, "vnodes must be positive");
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
    return Status(Code::kInvalidArgument, "duplicate node id");
  }
  Ring ring;
  ring.nodes_ = std::move(nodes);
  ring.vnodes_ = vnodes;
  ring.points_.reserve(ring.nodes_.size() * vnodes);
  for (NodeId n : ring.nodes_) {
    for (uint32_t i = 0; i < vnodes; ++i) ring.points_.emplace_back(VnodePoint(n, i), n);
  }
  std::sort(ring.points_.begin(), ring.points_.end());
  return ring;
}

NodeId Ring::Lookup(uint64_t hash) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), hash,
                             [](const auto& p, uint64_t h) { return p.first < h; });
  if (it == points_.end()) it = points_.begin();
  return it->second;
}

bool Ring::Contains(NodeId n) const { return std::binary_search(nodes_.begin(), nodes_.end(), n); }

std::map<NodeId, double> Ring::Coverage() const {
  std::map<NodeId, double> share;
  for (NodeId n : nodes_) share[n] = 0;
  constexpr double kSpace = 18446744073709551616.0;  // 2^64
  for (size_t i = 0; i < points_.size(); ++i) {
    // Point i owns the arc (previous point, point i]; unsigned wraparound
    // handles the arc that crosses zero.
    uint64_t prev = points_[i == 0 ? points_.size() - 1 : i - 1].first;
    uint64_t arc = points_[i].first - prev;
    if (points_.size() == 1) {
      share[points_[i].second] = 1.0;
      break;
    }
    share[points_[i].second] += static_cast<double>(arc) / kSpace;
  }
  return share;
}

uint64_t NameHash(std::string_view name) { return Fnv1a64(name); }

uint64_t NameParentHash(std::string_view name, DirectoryId pid) {
  uint8_t le[8];
  uint64_t v = Raw(pid);
  for (int i = 0; i < 8; ++i) le[i] = static_cast<uint8_t>(v >> (8 * i));
  return Fnv1a64(name, Fnv1a64(std::span<const uint8_t>(le, 8)));
}

NodeId OwnerByName(const Ring& ring, std::string_view name) { return ring.Lookup(NameHash(name)); }

NodeId OwnerByNameAndParent(const Ring& ring, std::string_view name, DirectoryId pid) {
  return ring.Lookup(NameParentHash(name, pid));
}

Ring ClusterView::BuildRing() const {
  auto r = Ring::Build(nodes, vnodes);
  return r.ok() ? std::move(r).value() : Ring();
}

}  // namespace falconmeta
