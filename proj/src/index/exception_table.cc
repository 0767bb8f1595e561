#include "falconmeta/index/exception_table.h"

namespace falconmeta {

const ExceptionEntry* ExceptionTable::Find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

size_t ExceptionTable::CountRule(RedirectRule rule) const {
  size_t n = 0;
  for (const auto& [_, e] : entries_) n += e.rule == rule ? 1 : 0;
  return n;
}

ExceptionTable ExceptionTable::With(ExceptionEntry entry) const {
  ExceptionTable t = *this;
  t.version_ = version_ + 1;
  std::string key = entry.name;
  t.entries_.insert_or_assign(std::move(key), std::move(entry));
  return t;
}

ExceptionTable ExceptionTable::Without(std::string_view name) const {
  ExceptionTable t = *this;
  t.version_ = version_ + 1;
  auto it = t.entries_.find(name);
  if (it != t.entries_.end()) t.entries_.erase(it);
  return t;
}

ExceptionTable ExceptionTable::WithVersion(uint64_t version) const {
  ExceptionTable t = *this;
  t.version_ = version;
  return t;
}

void ExceptionTable::EncodeTo(ByteWriter& w) const {
  w.PutU64(version_);
  w.PutU32(static_cast<uint32_t>(entries_.size()));
  for (const auto& [name, e] : entries_) {
    w.PutU16(static_cast<uint16_t>(name.size()));
    w.PutRaw(name);
    w.PutU8(static_cast<uint8_t>(e.rule));
    if (e.rule == RedirectRule::kOverride) w.PutU32(Raw(e.target));
  }
}

ExceptionTable ExceptionTable::DecodeFrom(ByteReader& r) {
  ExceptionTable t;
  t.version_ = r.GetU64();
  uint32_t count = r.GetU32();
  if (count > r.remaining()) {
    r.Fail();
    return ExceptionTable();
  }
  for (uint32_t i = 0; i < count && r.ok(); ++i) {
    ExceptionEntry e;
    e.name = r.GetString(r.GetU16());
    uint8_t tag = r.GetU8();
    if (tag > 1) {
      r.Fail();
      break;
    }
    e.rule = static_cast<RedirectRule>(tag);
    if (e.rule == RedirectRule::kOverride) e.target = NodeId(r.GetU32());
    std::string key = e.name;
    t.entries_.insert_or_assign(std::move(key), std::move(e));
  }
  if (!r.ok()) return ExceptionTable();
  return t;
}

Bytes ExceptionTable::Encode() const {
  ByteWriter w;
  EncodeTo(w);
  return w.Release();
}

const ExceptionTable& ApplyTableUpdate(const ExceptionTable& local, const ExceptionTable& incoming) {
  return incoming.version() > local.version() ? incoming : local;
}

}  // namespace falconmeta
