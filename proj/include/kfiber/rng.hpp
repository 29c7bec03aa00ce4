#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace kfiber {

/// SplitMix64 finalizer, used to derive substream seeds from a master seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Named random-number substreams. Each stochastic component draws from its
/// own stream so that adding draws in one stream cannot shift another.
enum class Stream : std::uint64_t {
  Germs = 1,
  Lengths = 2,
  Directions = 3,
  Grf = 4,
  Resampling = 5,
  FiberSampling = 6,
  Replicates = 7,
};

inline std::uint64_t derive_seed(std::uint64_t master, Stream s,
                                 std::uint64_t index = 0) {
  return mix64(mix64(master ^ static_cast<std::uint64_t>(s)) + index);
}

/// Deterministic RNG with hand-rolled samplers. Distributions in the
/// standard library are implementation-defined; these are not, so fixed
/// seeds reproduce bit-identical streams everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() {
    // 53 random bits in [0, 1).
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(2.0 * M_PI * u2);
    have_cached_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  /// Exact Poisson sampling; large means are split into chunks so the
  /// multiplication method never underflows.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: negative mean");
    std::uint64_t total = 0;
    while (mean > 30.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    return total + poisson_small(mean);
  }

  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection-free enough for our n; modulo bias is negligible at 64 bits.
    return gen_() % n;
  }

 private:
  std::uint64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace kfiber
