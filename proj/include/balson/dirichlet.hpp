#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "balson/error.hpp"
#include "balson/random.hpp"
#include "balson/special_functions.hpp"

namespace balson {

inline constexpr double kSimplexSumTolerance = 1e-12;

/// A point on the (K-1)-simplex: K >= 2 nonnegative weights summing to one.
class SimplexVector {
 public:
  explicit SimplexVector(std::vector<double> values) : values_(std::move(values)) {
    require(values_.size() >= 2, ErrorKind::kInvalidArgument, "simplex vector needs K >= 2");
    double sum = 0.0;
    for (double v : values_) {
      require(std::isfinite(v) && v >= 0.0, ErrorKind::kInvalidArgument,
              "simplex vector components must be finite and >= 0");
      sum += v;
    }
    require(std::fabs(sum - 1.0) <= kSimplexSumTolerance, ErrorKind::kInvalidArgument,
            "simplex vector components must sum to 1");
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const SimplexVector&, const SimplexVector&) = default;

 private:
  std::vector<double> values_;
};

/// Dirichlet concentration vector. Under the log-barrier reading of the
/// constrained problem, alpha_i = mu_i + 1 for barrier weight mu_i.
class DirichletParams {
 public:
  explicit DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    require(alpha_.size() >= 2, ErrorKind::kInvalidArgument, "Dirichlet needs K >= 2");
    for (double a : alpha_) {
      require(std::isfinite(a) && a > 0.0, ErrorKind::kInvalidArgument,
              "Dirichlet concentrations must be finite and > 0");
    }
  }

  static DirichletParams uniform(std::size_t k) { return DirichletParams(std::vector<double>(k, 1.0)); }

  std::size_t size() const { return alpha_.size(); }
  double operator[](std::size_t i) const { return alpha_[i]; }
  std::span<const double> alpha() const { return alpha_; }
  double concentration() const { return std::accumulate(alpha_.begin(), alpha_.end(), 0.0); }

  friend bool operator==(const DirichletParams&, const DirichletParams&) = default;

 private:
  std::vector<double> alpha_;
};

struct Moments {
  std::vector<double> mean;
  std::vector<double> variance;
};

/// ln Dir(point; params). Returns -inf where the density vanishes
/// (alpha_i > 1 at a zero coordinate) and throws kUnboundedDensity where it
/// diverges (alpha_i < 1 at a zero coordinate).
inline double log_density(const DirichletParams& params, const SimplexVector& point) {
  require(params.size() == point.size(), ErrorKind::kDimensionMismatch,
          "log_density: alpha has " + std::to_string(params.size()) + " components, point has " +
              std::to_string(point.size()));
  double acc = -log_multivariate_beta(params.alpha());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double a = params[i];
    const double w = point[i];
    if (a == 1.0) continue;
    if (w == 0.0) {
      if (a < 1.0) fail(ErrorKind::kUnboundedDensity, "alpha_" + std::to_string(i) + " < 1 at a zero coordinate");
      return -std::numeric_limits<double>::infinity();
    }
    acc += (a - 1.0) * std::log(w);
  }
  return acc;
}

/// Draw from Dir(params) by normalizing independent Gamma(alpha_i, 1)
/// variates; normalization is done in log space.
inline SimplexVector sample(const DirichletParams& params, RandomStream& rng) {
  const std::size_t k = params.size();
  std::vector<double> logs(k);
  for (std::size_t i = 0; i < k; ++i) logs[i] = rng.log_gamma_variate(params[i]);
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double& v : logs) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : logs) v /= sum;
  return SimplexVector(std::move(logs));
}

inline Moments moments(const DirichletParams& params) {
  const double a0 = params.concentration();
  Moments m;
  m.mean.reserve(params.size());
  m.variance.reserve(params.size());
  for (double a : params.alpha()) {
    m.mean.push_back(a / a0);
    m.variance.push_back(a * (a0 - a) / (a0 * a0 * (a0 + 1.0)));
  }
  return m;
}

inline constexpr double kMatchedAlphaFloor = 1e-6;

/// Dirichlet whose first two moments match the given ones.
///
/// Each dimension yields its own estimate of the total concentration,
/// alpha0 = m (1 - m) / v - 1. Dimensions with v < 1e-12, m outside
/// (1e-9, 1 - 1e-9), or a non-positive / non-finite estimate are skipped and
/// the rest are averaged.
inline DirichletParams match_moments(std::span<const double> mean, std::span<const double> variance) {
  require(mean.size() == variance.size(), ErrorKind::kDimensionMismatch,
          "match_moments: mean and variance lengths differ");
  require(mean.size() >= 2, ErrorKind::kInvalidArgument, "match_moments needs K >= 2");
  double total = 0.0;
  for (double m : mean) {
    require(std::isfinite(m) && m >= 0.0, ErrorKind::kInvalidArgument, "match_moments: bad mean");
    total += m;
  }
  require(std::fabs(total - 1.0) <= 1e-6, ErrorKind::kInvalidArgument,
          "match_moments: means must sum to 1 (got " + std::to_string(total) + ")");

  std::vector<double> m(mean.begin(), mean.end());
  for (double& v : m) v /= total;

  double estimate_sum = 0.0;
  int estimate_count = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double v = variance[i];
    if (!(v >= 1e-12) || !(m[i] > 1e-9 && m[i] < 1.0 - 1e-9)) continue;
    const double a0 = m[i] * (1.0 - m[i]) / v - 1.0;
    if (!std::isfinite(a0) || a0 <= 0.0) continue;
    estimate_sum += a0;
    ++estimate_count;
  }
  if (estimate_count == 0) {
    fail(ErrorKind::kMomentMatchingDegenerate, "no dimension gives a positive finite concentration");
  }
  const double a0 = estimate_sum / estimate_count;
  std::vector<double> alpha(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) alpha[i] = std::max(a0 * m[i], kMatchedAlphaFloor);
  return DirichletParams(std::move(alpha));
}

inline DirichletParams match_moments(const Moments& mo) { return match_moments(mo.mean, mo.variance); }

/// Sparse mode: coordinates with alpha_i <= 1 are exactly zero and the rest
/// are (alpha_i - 1) / (sum_{alpha_j > 1} alpha_j - K*).
inline SimplexVector mode(const DirichletParams& params) {
  double active_sum = 0.0;
  int active = 0;
  for (double a : params.alpha()) {
    if (a > 1.0) {
      active_sum += a;
      ++active;
    }
  }
  if (active == 0) fail(ErrorKind::kModeUndefined, "no alpha_i exceeds 1");
  const double denom = active_sum - active;
  std::vector<double> w(params.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i] > 1.0) {
      w[i] = (params[i] - 1.0) / denom;
      sum += w[i];
    }
  }
  // absorb the rounding residue so the sum is 1 to the last ulp or so
  for (double& v : w) v /= sum;
  return SimplexVector(std::move(w));
}

/// Posterior mean alpha / alpha0, used when the mode is undefined.
inline SimplexVector mean_point(const DirichletParams& params) {
  const double a0 = params.concentration();
  std::vector<double> w(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) w[i] = params[i] / a0;
  double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= sum;
  return SimplexVector(std::move(w));
}

}  // namespace balson
