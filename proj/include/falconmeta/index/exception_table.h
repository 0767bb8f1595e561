#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "falconmeta/common/bytes.h"
#include "falconmeta/model/types.h"

namespace falconmeta {

enum class RedirectRule : uint8_t { kPathWalk = 0, kOverride = 1 };

struct ExceptionEntry {
  std::string name;
  RedirectRule rule = RedirectRule::kPathWalk;
  NodeId target{0};  // meaningful only for kOverride

  friend bool operator==(const ExceptionEntry&, const ExceptionEntry&) = default;
};

// Versioned filename -> redirection map. Values are immutable snapshots:
// every mutation yields a new table with a higher version.
class ExceptionTable {
 public:
  using EntryMap = std::map<std::string, ExceptionEntry, std::less<>>;

  ExceptionTable() = default;

  uint64_t version() const { return version_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const EntryMap& entries() const { return entries_; }

  const ExceptionEntry* Find(std::string_view name) const;
  size_t CountRule(RedirectRule rule) const;

  ExceptionTable With(ExceptionEntry entry) const;
  ExceptionTable Without(std::string_view name) const;
  ExceptionTable WithVersion(uint64_t version) const;

  // Wire format: u64 version | u32 count | per entry: u16 name_len, name,
  // u8 rule tag, u32 node id (override entries only).
  void EncodeTo(ByteWriter& w) const;
  static ExceptionTable DecodeFrom(ByteReader& r);
  Bytes Encode() const;

  friend bool operator==(const ExceptionTable&, const ExceptionTable&) = default;

 private:
  uint64_t version_ = 0;
  EntryMap entries_;
};

// Newer version wins; equal or older incoming tables leave `local` as is.
const ExceptionTable& ApplyTableUpdate(const ExceptionTable& local, const ExceptionTable& incoming);

}  // namespace falconmeta
