#include "falconmeta/storage/namespace_replica.h"

namespace falconmeta {

NamespaceReplica::NamespaceReplica() : map_(&resource_) {}

std::pmr::string NamespaceReplica::EncodeKey(const DentryKey& key, std::pmr::memory_resource* mr) {
  std::pmr::string out(mr);
  out.reserve(8 + key.name.size());
  uint64_t pid = Raw(key.pid);
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<char>(pid >> (8 * i)));
  out.append(key.name);
  return out;
}

std::optional<DentryRecord> NamespaceReplica::Find(const DentryKey& key) const {
  auto it = map_.find(EncodeKey(key, std::pmr::get_default_resource()));
  if (it == map_.end()) return std::nullopt;
  const Value& v = it->second;
  return DentryRecord{key, v.dir_id, v.perm, v.state, v.gen};
}

uint64_t NamespaceReplica::Gen(const DentryKey& key) const {
  auto it = map_.find(EncodeKey(key, std::pmr::get_default_resource()));
  return it == map_.end() ? 0 : it->second.gen;
}

bool NamespaceReplica::InstallFetched(const DentryKey& key, DirectoryId dir_id, const Permission& perm,
                                      uint64_t issued_gen) {
  auto [it, inserted] = map_.try_emplace(EncodeKey(key, &resource_));
  Value& v = it->second;
  if (!inserted && v.gen > issued_gen) return false;
  v.dir_id = dir_id;
  v.perm = perm;
  v.state = DentryState::kValid;
  return true;
}

void NamespaceReplica::PutValid(const DentryKey& key, DirectoryId dir_id, const Permission& perm) {
  Value& v = map_[EncodeKey(key, &resource_)];
  v.dir_id = dir_id;
  v.perm = perm;
  v.state = DentryState::kValid;
}

uint64_t NamespaceReplica::Invalidate(const DentryKey& key) {
  Value& v = map_[EncodeKey(key, &resource_)];
  v.state = DentryState::kInvalid;
  return ++v.gen;
}

size_t NamespaceReplica::valid_count() const {
  size_t n = 0;
  for (const auto& [_, v] : map_) n += v.state == DentryState::kValid;
  return n;
}

}  // namespace falconmeta
