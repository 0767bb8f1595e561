#include "falconmeta/index/route.h"

namespace falconmeta {

RouteDecision Route(const Ring& ring, const ExceptionTable& table, const PathName& path) {
  if (path.is_root()) return {RouteDecision::Kind::kDirect, ring.nodes().front()};
  const std::string& name = path.leaf();
  if (const ExceptionEntry* e = table.Find(name)) {
    if (e->rule == RedirectRule::kOverride) return {RouteDecision::Kind::kOverride, e->target};
    return {RouteDecision::Kind::kRandomThenWalk, NodeId(0)};
  }
  return {RouteDecision::Kind::kDirect, OwnerByName(ring, name)};
}

NodeId PlacementOwner(const Ring& ring, const ExceptionTable& table, DirectoryId pid, std::string_view name) {
  if (const ExceptionEntry* e = table.Find(name)) {
    // An override target that left the cluster falls back to hashing.
    if (e->rule == RedirectRule::kOverride && ring.Contains(e->target)) return e->target;
    if (e->rule == RedirectRule::kPathWalk) return OwnerByNameAndParent(ring, name, pid);
  }
  return OwnerByName(ring, name);
}

}  // namespace falconmeta
