#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace stableinfer {

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Zero-padded lowercase hex of a 64-bit value.
std::string hex64(std::uint64_t value);

/// printf("%.17g"): round-trippable decimal form of a double.
std::string format_double(double value);

}  // namespace stableinfer
