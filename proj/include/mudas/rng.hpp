#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mudas {

/// Deterministic random source. Wraps std::mt19937_64 but derives all
/// variates with fixed arithmetic instead of std::*_distribution, whose
/// output is implementation-defined. Same seed, same stream, everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(engine_() % n);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller. Two uniforms per call, no cached
  /// second value, so the draw count per call is constant.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  /// Independent stream derived from this rng's seed and a tag.
  Rng derive(std::uint64_t tag) const { return Rng(mix(seed_, tag)); }

 private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined word
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace mudas
