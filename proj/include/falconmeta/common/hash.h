#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace falconmeta {

inline constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

// FNV-1a 64. Chainable: pass the previous result as `seed`.
constexpr uint64_t Fnv1a64(std::string_view data, uint64_t seed = kFnvOffsetBasis) {
  uint64_t h = seed;
  for (char c : data) {
    h ^= static_cast<uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

inline uint64_t Fnv1a64(std::span<const uint8_t> data, uint64_t seed = kFnvOffsetBasis) {
  uint64_t h = seed;
  for (uint8_t c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

constexpr uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint32_t Crc32(std::span<const uint8_t> data);

}  // namespace falconmeta
