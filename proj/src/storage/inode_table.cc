#include "falconmeta/storage/inode_table.h"

#include <algorithm>

namespace falconmeta {

const InodeRecord* InodeTable::Find(const DentryKey& key) const {
  auto it = map_.find(key);
  return it == map_.end() ? nullptr : &it->second;
}

bool InodeTable::Insert(const InodeRecord& rec) {
  auto [it, inserted] = map_.try_emplace(rec.key, rec);
  if (inserted) Count(rec.key.name, +1);
  return inserted;
}

void InodeTable::Put(const InodeRecord& rec) {
  auto [it, inserted] = map_.insert_or_assign(rec.key, rec);
  if (inserted) Count(rec.key.name, +1);
}

bool InodeTable::Erase(const DentryKey& key) {
  if (map_.erase(key) == 0) return false;
  Count(key.name, -1);
  return true;
}

std::vector<InodeRecord> InodeTable::Children(DirectoryId pid) const {
  std::vector<InodeRecord> out;
  for (auto it = map_.lower_bound(DentryKey{pid, ""}); it != map_.end() && it->first.pid == pid; ++it) {
    out.push_back(it->second);
  }
  return out;
}

bool InodeTable::HasChildren(DirectoryId pid) const {
  auto it = map_.lower_bound(DentryKey{pid, ""});
  return it != map_.end() && it->first.pid == pid;
}

uint64_t InodeTable::NameCount(const std::string& name) const {
  auto it = freq_.find(name);
  return it == freq_.end() ? 0 : it->second;
}

std::vector<rpc::NameCount> InodeTable::TopK(size_t k) const {
  std::vector<rpc::NameCount> all;
  all.reserve(freq_.size());
  for (const auto& [name, n] : freq_) all.push_back({name, n});
  auto better = [](const rpc::NameCount& a, const rpc::NameCount& b) {
    return a.count != b.count ? a.count > b.count : a.name < b.name;
  };
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
  all.resize(k);
  return all;
}

void InodeTable::Count(const std::string& name, int delta) {
  if (delta > 0) {
    ++freq_[name];
    return;
  }
  auto it = freq_.find(name);
  if (it != freq_.end() && --it->second == 0) freq_.erase(it);
}

}  // namespace falconmeta
