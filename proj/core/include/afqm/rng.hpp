#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace afqm {

inline constexpr double kPi = std::numbers::pi;

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer; good avalanche for cheap seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed of the `stream`-th independent substream of `base`.  Every parallel
// unit of work (a Monte-Carlo trial, an optimizer run, a held-out
// evaluation) gets its own stream id, so results never depend on which
// thread ran what.
inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base + kGolden * (stream + 1));
}

// Counter-based random stream (SplitMix64).  Draws are a pure function of
// (seed, position), so creating or re-seeding a stream is free and skipping
// draws costs nothing; simulation code leans on both to keep draw positions
// aligned between engines and across noise configurations.
//
// Fixed draw-count contract: uniform() consumes one engine step, normal()
// exactly two.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  void reseed(std::uint64_t seed) { state_ = seed; }

  // Advance the position without computing the draws.
  void skip(std::uint64_t draws) { state_ += kGolden * draws; }

  std::uint64_t raw() {
    state_ += kGolden;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(raw() >> 11) * 0x1.0p-53; }

  // Uniform on [-pi, pi).
  double uniform_angle() { return (2.0 * uniform() - 1.0) * kPi; }

  // Standard normal via Box-Muller; always two uniforms, no caching.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Integer in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n) {
    auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

 private:
  std::uint64_t state_;
};

}  // namespace afqm
