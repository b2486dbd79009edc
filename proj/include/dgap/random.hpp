#pragma once

#include <bit>
#include <cstdint>

namespace dgap {

/// Seeded splitmix64 source. The algorithm is pinned here rather than taken
/// from <random> so draws are identical across standard library vendors and
/// cheap enough for per-iteration subset sampling.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Requires n >= 1. Mask-and-reject, no modulo
  /// bias and no division.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t mask = std::bit_ceil(n) - 1;
    for (;;) {
      const std::uint64_t r = next() & mask;
      if (r < n) return r;
    }
  }

  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::uint64_t state_;
};

}  // namespace dgap
