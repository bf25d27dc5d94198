#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hmasim {

/// splitmix64 finalizer; used to turn seeds and stream labels into
/// well-mixed initial states.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded random stream. Every stochastic routine takes one of these by
/// reference; a run derives disjoint streams from its base seed so that
/// phases do not share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  static Rng derive(std::uint64_t seed, std::uint64_t stream_label) {
    return Rng(splitmix64(seed) ^ splitmix64(~stream_label));
  }

  /// Uniform double in [0, 1).
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unit-mean exponential draw.
  double exponential() { return -std::log1p(-uniform()); }

  /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace hmasim
