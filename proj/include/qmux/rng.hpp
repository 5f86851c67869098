#pragma once

#include <cmath>
#include <cstdint>

namespace qmux::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Counter-based stream: the state for (seed, stream) is derived by hashing,
// so every round of a Monte Carlo run gets an independent generator and the
// draw sequence is identical no matter how rounds are scheduled over threads.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream)
      : state_(splitmix64(splitmix64(seed) ^ splitmix64(stream ^ 0xa02bdbf7bb3c0a7ull))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in (0, 1]; never returns 0, so log(u) is always finite.
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

inline constexpr std::uint64_t kMaxGeometricDraw = 1ull << 31;

/// Attempts-until-first-success for Bernoulli(p), support {1, 2, ...}.
/// Draws are capped at kMaxGeometricDraw (relevant only for p below ~1e-9).
inline std::uint64_t geometric(Stream& stream, double p) {
  if (p >= 1.0) return 1;
  const double u = stream.uniform_pos();
  const double n = std::floor(std::log(u) / std::log1p(-p));
  if (!(n < static_cast<double>(kMaxGeometricDraw))) return kMaxGeometricDraw;
  return 1 + static_cast<std::uint64_t>(n);
}

}  // namespace qmux::rng
