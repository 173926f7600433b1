#pragma once

#include <cstdint>

namespace fpqkd {

/// splitmix64 finalizer; full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based uniform stream. Every variate is addressed by
/// (seed, sample index, lane), so shard workers can draw the randomness of
/// sample i without any shared state, and shards=1 and shards=N produce
/// bit-identical streams. Within a sample the draws follow a splitmix64
/// sequence started at a hashed offset.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t index)
      : base_(mix64(seed + mix64((index + 1) * kGamma))) {}

  std::uint64_t bits(unsigned lane) const {
    return mix64(base_ + (lane + 1) * kGamma);
  }

  /// Uniform double in [0, 1), 53-bit mantissa, platform-independent.
  double uniform(unsigned lane) const {
    return static_cast<double>(bits(lane) >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  std::uint64_t base_;
};

/// Lane assignments for the per-sample variates of the simulation pipeline.
/// Fixed positions keep trace re-analysis and Monte Carlo runs on the same
/// draws for the same (seed, index).
namespace lane {
inline constexpr unsigned phase0 = 0;   // four source phases: lanes 0..3
inline constexpr unsigned accept_h = 4;
inline constexpr unsigned accept_v = 5;
inline constexpr unsigned bob_basis = 6;
inline constexpr unsigned click_first = 7;
inline constexpr unsigned click_second = 8;
inline constexpr unsigned squash = 9;
}  // namespace lane

}  // namespace fpqkd
