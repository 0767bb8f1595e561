#include "falconmeta/common/hash.h"

#include <zlib.h>

namespace falconmeta {

uint32_t Crc32(std::span<const uint8_t> data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<uint32_t>(crc32(crc, data.data(), static_cast<uInt>(data.size())));
}

}  // namespace falconmeta
