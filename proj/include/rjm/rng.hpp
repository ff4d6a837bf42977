#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rjm {

// splitmix64 step; used to derive well-separated child seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Seed for substream `index` under `master`. Replications each get their own
// stream so results do not depend on scheduling or evaluation order.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (0xD1B54A32D192ED03ull * (index + 1));
  return splitmix64(s);
}

/// Deterministic random source. The engine (mt19937_64) is fully specified by
/// the standard and every transform below is written out explicitly instead
/// of going through std::*_distribution (whose output is
/// implementation-defined), so a seed pins the byte-exact stream on any
/// conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, k). Rejection keeps it exactly unbiased.
  std::uint64_t uniform_index(std::uint64_t k) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % k;
  }

  // Standard normal via Box-Muller. No caching of the second value, so each
  // call consumes exactly two engine draws.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Mean-zero Laplace with the given scale b (variance 2 b^2), inverse CDF.
  double laplace(double scale) {
    const double u = uniform() - 0.5;
    const double mag = std::log1p(-2.0 * std::abs(u));  // <= 0
    return (u < 0.0 ? scale : -scale) * mag;
  }

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace rjm
