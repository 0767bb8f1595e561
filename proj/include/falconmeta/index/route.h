#pragma once

#include "falconmeta/index/exception_table.h"
#include "falconmeta/index/ring.h"
#include "falconmeta/model/path.h"

namespace falconmeta {

struct RouteDecision {
  enum class Kind : uint8_t { kDirect, kRandomThenWalk, kOverride };
  Kind kind = Kind::kDirect;
  NodeId node{0};  // unused for kRandomThenWalk

  friend bool operator==(const RouteDecision&, const RouteDecision&) = default;
};

// Client-side routing from the final path component alone.
RouteDecision Route(const Ring& ring, const ExceptionTable& table, const PathName& path);

// Authoritative placement of the inode keyed (pid, name); servers use this
// to validate and forward requests and to locate dentry owners.
NodeId PlacementOwner(const Ring& ring, const ExceptionTable& table, DirectoryId pid, std::string_view name);

}  // namespace falconmeta
