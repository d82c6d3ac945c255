#pragma once

#include <cstdint>

namespace stableinfer {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hash of a (seed, a, b) triple used to key independent substreams.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b = 0) noexcept {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (a * 0xd6e8feb86659fd93ULL + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (b * 0xa0761d6478bd642fULL + 0xe7037ed1a0b428dbULL));
  return h;
}

/// Counter-based generator: draw k is mix64(key + k * golden).  Two streams
/// with different keys never share state, so batch sampling can be split
/// across threads without changing any output bit.
class Stream {
 public:
  explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on the open interval (0, 1).
  double uniform01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() noexcept;

  /// Unit-rate exponential.
  double exponential() noexcept;

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// A seeded family of substreams: element i of a batch always comes from
/// `at(i)`, independent of how the batch is scheduled.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t id = 0;

  Stream at(std::uint64_t index) const noexcept { return Stream(stream_key(seed, id, index)); }
  RngStream child(std::uint64_t sub) const noexcept {
    return RngStream{stream_key(seed, id, sub), sub};
  }
};

}  // namespace stableinfer
