#pragma once

#include <span>

#include "falconmeta/common/bytes.h"
#include "falconmeta/common/status.h"
#include "falconmeta/model/types.h"

namespace falconmeta {

// Bit-exact dentry wire layout, little-endian:
//   u64 pid | u64 dir_id | u32 uid | u32 gid | u16 mode | u8 state |
//   u16 name_len | name bytes
inline constexpr size_t kDentryHeaderBytes = 29;

Bytes EncodeDentry(const DentryRecord& rec);
void EncodeDentry(const DentryRecord& rec, ByteWriter& w);
// Rejects truncated input, trailing bytes, bad state tags and overlong names.
Result<DentryRecord> DecodeDentry(std::span<const uint8_t> data);

}  // namespace falconmeta
