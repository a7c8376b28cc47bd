#pragma once

#include <cstdint>
#include <string_view>

namespace parselab {

// FNV-1a 64 over the key bytes followed by the murmur3 fmix64 finalizer.
// Both are fixed published functions, so indices are stable across runs
// and platforms.
inline std::uint64_t hash64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

// Feature index for (template id, key) in a 2^bits hash space.
inline std::uint64_t hash_index(std::string_view template_id, std::string_view key, int bits) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : template_id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  h ^= 0x1f;  // separator so ("ab","c") != ("a","bc")
  h *= 1099511628211ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h & ((std::uint64_t{1} << bits) - 1);
}

}  // namespace parselab
