#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "balson/error.hpp"
#include "balson/special_functions.hpp"

namespace balson {

struct MetricPair {
  double mse = 0.0;
  double sparsity = 0.0;
};

/// (1 / N) sum (actual - fitted)^2.
inline double mse(std::span<const double> actual, std::span<const double> fitted) {
  require(actual.size() == fitted.size(), ErrorKind::kDimensionMismatch,
          "mse: " + std::to_string(actual.size()) + " actual vs " + std::to_string(fitted.size()) + " fitted");
  require(!actual.empty(), ErrorKind::kInvalidArgument, "mse of empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = actual[i] - fitted[i];
    acc += d * d;
  }
  return acc / static_cast<double>(actual.size());
}

/// Hoyer sparsity (sqrt(K) - ||v||_1 / ||v||_2) / (sqrt(K) - 1): 0 for a
/// constant-magnitude vector, 1 for a one-hot vector.
inline double sparsity(std::span<const double> theta) {
  require(theta.size() >= 2, ErrorKind::kInvalidArgument, "sparsity needs K >= 2");
  // scale by the largest magnitude so the ratio is immune to over/underflow
  double top = 0.0;
  for (double v : theta) top = std::max(top, std::fabs(v));
  if (top == 0.0) fail(ErrorKind::kSparsityUndefined, "all-zero vector");
  double l1 = 0.0, l2 = 0.0;
  for (double v : theta) {
    const double a = std::fabs(v) / top;
    l1 += a;
    l2 += a * a;
  }
  const double root_k = std::sqrt(static_cast<double>(theta.size()));
  const double s = (root_k - std::sqrt(l1 * l1 / l2)) / (root_k - 1.0);
  return std::clamp(s, 0.0, 1.0);
}

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  int df = 0;
};

/// Paired two-sided t-test on a - b with the (n-1) standard deviation.
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::kDimensionMismatch, "paired t-test needs equal lengths");
  require(a.size() >= 2, ErrorKind::kInvalidArgument, "paired t-test needs n >= 2");
  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  if (!(ss > 0.0)) fail(ErrorKind::kDegenerateTTest, "differences have zero variance");
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  TTestResult r;
  r.df = static_cast<int>(n - 1);
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = 2.0 * student_t_sf(std::fabs(r.t), r.df);
  return r;
}

}  // namespace balson
