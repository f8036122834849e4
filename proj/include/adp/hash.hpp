#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace adp {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

/// 64-bit FNV-1a. Stable across platforms; used for content checksums and
/// request/cache keys, not for security.
constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t state = kFnvOffset) {
  for (unsigned char byte : data) {
    state ^= byte;
    state *= kFnvPrime;
  }
  return state;
}

std::string hex64(std::uint64_t value);

}  // namespace adp
