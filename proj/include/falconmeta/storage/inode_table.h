#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "falconmeta/model/types.h"
#include "falconmeta/rpc/messages.h"

namespace falconmeta {

// One node's shard of inode records, ordered by (pid, name). Per-name
// frequencies are maintained incrementally for load reports.
class InodeTable {
 public:
  using Map = std::map<DentryKey, InodeRecord>;

  const InodeRecord* Find(const DentryKey& key) const;
  // False if the key already exists.
  bool Insert(const InodeRecord& rec);
  // Inserts or replaces.
  void Put(const InodeRecord& rec);
  bool Erase(const DentryKey& key);

  std::vector<InodeRecord> Children(DirectoryId pid) const;
  bool HasChildren(DirectoryId pid) const;

  uint64_t NameCount(const std::string& name) const;
  // Most frequent names, count descending then name ascending.
  std::vector<rpc::NameCount> TopK(size_t k) const;
  const std::unordered_map<std::string, uint64_t>& name_counts() const { return freq_; }

  size_t size() const { return map_.size(); }
  const Map& records() const { return map_; }
  void Clear() {
    map_.clear();
    freq_.clear();
  }

 private:
  void Count(const std::string& name, int delta);

  Map map_;
  std::unordered_map<std::string, uint64_t> freq_;
};

}  // namespace falconmeta
