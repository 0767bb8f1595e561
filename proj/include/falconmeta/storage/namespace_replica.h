#pragma once

#include <cstdint>
#include <map>
#include <memory_resource>
#include <optional>
#include <string>

#include "falconmeta/model/types.h"

namespace falconmeta {

// Tracks bytes currently allocated through it.
class CountingResource : public std::pmr::memory_resource {
 public:
  explicit CountingResource(std::pmr::memory_resource* upstream = std::pmr::new_delete_resource())
      : upstream_(upstream) {}

  size_t bytes_in_use() const { return in_use_; }
  size_t peak_bytes() const { return peak_; }

 private:
  void* do_allocate(size_t bytes, size_t align) override {
    in_use_ += bytes;
    if (in_use_ > peak_) peak_ = in_use_;
    return upstream_->allocate(bytes, align);
  }
  void do_deallocate(void* p, size_t bytes, size_t align) override {
    in_use_ -= bytes;
    upstream_->deallocate(p, bytes, align);
  }
  bool do_is_equal(const std::pmr::memory_resource& other) const noexcept override { return this == &other; }

  std::pmr::memory_resource* upstream_;
  size_t in_use_ = 0;
  size_t peak_ = 0;
};

// Node-local, lazily filled copy of the directory tree. Entries are never
// erased by invalidation: an Invalid entry keeps its generation so responses
// to lookups issued before the invalidation can be recognised and dropped.
class NamespaceReplica {
 public:
  NamespaceReplica();
  NamespaceReplica(const NamespaceReplica&) = delete;
  NamespaceReplica& operator=(const NamespaceReplica&) = delete;

  std::optional<DentryRecord> Find(const DentryKey& key) const;
  // Current generation of `key` (0 if never seen).
  uint64_t Gen(const DentryKey& key) const;

  // Installs a dentry fetched from its owner. Dropped (returns false) when
  // the key was invalidated after the lookup was issued at `issued_gen`.
  bool InstallFetched(const DentryKey& key, DirectoryId dir_id, const Permission& perm, uint64_t issued_gen);
  // Owner-side install (mkdir, recovery, rename destination).
  void PutValid(const DentryKey& key, DirectoryId dir_id, const Permission& perm);
  // Marks Invalid and bumps the generation. Creates a tombstone if absent.
  uint64_t Invalidate(const DentryKey& key);

  size_t size() const { return map_.size(); }
  size_t valid_count() const;
  size_t memory_bytes() const { return resource_.bytes_in_use(); }

  // Crash: the replica is volatile.
  void Clear() { map_.clear(); }

 private:
  struct Value {
    DirectoryId dir_id = kRootDir;
    Permission perm;
    DentryState state = DentryState::kValid;
    uint64_t gen = 0;
  };
  // Key bytes: big-endian pid followed by the name, so ordering matches
  // (pid, name) and one directory's children are contiguous.
  static std::pmr::string EncodeKey(const DentryKey& key, std::pmr::memory_resource* mr);

  CountingResource resource_;
  std::pmr::map<std::pmr::string, Value> map_;
};

}  // namespace falconmeta
