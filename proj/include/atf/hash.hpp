#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace atf {

inline constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ull;

constexpr uint64_t fnv1a64(std::string_view data, uint64_t seed = kFnvOffset) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::string to_hex(uint64_t value);

// Digest used for manifests and deterministic nonces.
std::string fnv1a64_hex(std::string_view data);

}  // namespace atf
