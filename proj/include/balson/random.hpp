#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace balson {

namespace detail {

// splitmix64 finalizer; used to derive well-separated substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Seeded pseudo-random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard; every variate below is generated by code in this header, so a
/// given seed produces bit-identical draws on every conforming platform.
/// Substreams are keyed by (seed, index) and do not depend on how much of the
/// parent stream has been consumed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(detail::mix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  RandomStream split(std::uint64_t index) const {
    return RandomStream(detail::mix64(seed_ ^ detail::mix64(index + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    for (;;) {
      double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    for (;;) {
      double u = 2.0 * uniform() - 1.0;
      double v = 2.0 * uniform() - 1.0;
      double s = u * u + v * v;
      if (s < 1.0 && s > 0.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  /// Natural log of a Gamma(shape, 1) variate.
  ///
  /// Marsaglia-Tsang squeeze for shape >= 1; for shape < 1 the boost
  /// G(a) = G(a + 1) * U^(1/a) is applied in log space so tiny shapes do not
  /// underflow to an exact zero.
  double log_gamma_variate(double shape) {
    if (shape < 1.0) {
      double boosted = log_gamma_variate(shape + 1.0);
      return boosted + std::log(uniform()) / shape;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
  }

  double gamma(double shape, double scale = 1.0) {
    return std::exp(log_gamma_variate(shape)) * scale;
  }

  /// Inverse Gaussian (Wald) with the given mean and shape, by the
  /// Michael-Schucany-Haas transformation.
  double inverse_gaussian(double mean, double shape) {
    const double z = normal();
    // q = mean * z^2 / (2 shape); the smaller root is written in the
    // cancellation-free form mean / (1 + q + sqrt(q (2 + q))).
    const double q = mean * z * z / (2.0 * shape);
    const double x = mean / (1.0 + q + std::sqrt(q * (2.0 + q)));
    if (uniform() <= mean / (mean + x)) return x;
    return mean * mean / x;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace balson
