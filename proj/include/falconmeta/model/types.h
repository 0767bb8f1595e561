#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "falconmeta/common/bytes.h"

namespace falconmeta {

// Strong integer ids. Enum classes give distinct types with ordering and
// std::hash support for free.
enum class NodeId : uint32_t {};
enum class DirectoryId : uint64_t {};
enum class InodeId : uint64_t {};

inline constexpr DirectoryId kRootDir{0};

constexpr uint32_t Raw(NodeId v) { return static_cast<uint32_t>(v); }
constexpr uint64_t Raw(DirectoryId v) { return static_cast<uint64_t>(v); }
constexpr uint64_t Raw(InodeId v) { return static_cast<uint64_t>(v); }

// Ids are minted per node without coordination: owner node in the top 8
// bits, a per-node monotonic counter in the low 56.
inline constexpr int kIdCounterBits = 56;
inline constexpr uint64_t kIdCounterMask = (uint64_t{1} << kIdCounterBits) - 1;

constexpr uint64_t MakeId(NodeId node, uint64_t counter) {
  return (uint64_t{Raw(node)} << kIdCounterBits) | (counter & kIdCounterMask);
}
constexpr uint64_t IdCounter(uint64_t id) { return id & kIdCounterMask; }
constexpr NodeId IdOwner(uint64_t id) { return NodeId(static_cast<uint32_t>(id >> kIdCounterBits)); }

struct Permission {
  uint16_t mode = 0;
  uint32_t uid = 0;
  uint32_t gid = 0;

  friend bool operator==(const Permission&, const Permission&) = default;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(mode, uid, gid);
  }
};

inline constexpr uint16_t kMaxMode = 07777;

struct Credentials {
  uint32_t uid = 0;
  uint32_t gid = 0;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(uid, gid);
  }
};

enum class Access : uint8_t { kRead = 4, kWrite = 2, kExec = 1 };

// Owner/group/other mode-bit evaluation; uid 0 bypasses every check.
bool CheckPermission(const Permission& perm, const Credentials& who, Access want);

// Key of both the namespace replica and the inode table.
struct DentryKey {
  DirectoryId pid = kRootDir;
  std::string name;

  friend auto operator<=>(const DentryKey&, const DentryKey&) = default;
  friend bool operator==(const DentryKey&, const DentryKey&) = default;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(pid, name);
  }
};

std::string ToString(const DentryKey& key);

enum class DentryState : uint8_t { kValid = 0, kInvalid = 1 };

struct DentryRecord {
  DentryKey key;
  DirectoryId dir_id = kRootDir;
  Permission perm;
  DentryState state = DentryState::kValid;
  // Node-local invalidation generation; not part of the wire encoding.
  uint64_t gen = 0;

  friend bool operator==(const DentryRecord&, const DentryRecord&) = default;
};

enum class InodeKind : uint8_t { kFile = 0, kDirectory = 1 };

struct InodeRecord {
  DentryKey key;
  InodeId id{0};
  InodeKind kind = InodeKind::kFile;
  Permission perm;
  uint64_t size = 0;
  uint64_t mtime = 0;
  // Set iff kind == kDirectory; children use it as their pid.
  DirectoryId dir_id = kRootDir;

  bool is_dir() const { return kind == InodeKind::kDirectory; }

  friend bool operator==(const InodeRecord&, const InodeRecord&) = default;

  template <typename Ar>
  void Fields(Ar& ar) {
    ar(key, id, kind, perm, size, mtime, dir_id);
  }
};

// The root directory is implicit on every node and immutable.
inline constexpr Permission kRootPermission{0777, 0, 0};

}  // namespace falconmeta
