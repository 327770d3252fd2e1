#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace qcwarp {

/// Counter-based generator: draw `i` of stream (seed, stream) is a pure
/// function of its arguments, so results do not depend on evaluation order.
///
/// The key is splitmix64(seed ^ splitmix64(stream)); draw i is
/// splitmix64(key + (i + 1) * 0x9E3779B97F4A7C15). splitmix64 uses the
/// finaliser constants 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB with shifts
/// 30, 27, 31.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream))) {}

  static constexpr std::uint64_t mix(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t bits(std::uint64_t i) const noexcept {
    return mix(key_ + (i + 1) * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in [0, 1).
  double uniform(std::uint64_t i) const noexcept {
    return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
  }

  /// Standard normal from draws 2i and 2i+1 (Box-Muller, cosine branch).
  double normal(std::uint64_t i) const noexcept {
    const double u1 = static_cast<double>((bits(2 * i) >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

}  // namespace qcwarp
