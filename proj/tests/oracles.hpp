#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library: densities use std::lgamma, residuals are summed term by term,
// and linear systems are solved by plain Gaussian elimination.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

/// sum_k theta_k x^k with std::pow.
inline double poly(const std::vector<double>& theta, double x) {
  double acc = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) acc += theta[k] * std::pow(x, static_cast<double>(k));
  return acc;
}

inline double rss(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& theta) {
  double acc = 0.0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const double r = ys[n] - poly(theta, xs[n]);
    acc += r * r;
  }
  return acc;
}

/// ln Dir(w; alpha) from std::lgamma; w must be interior where alpha_i != 1.
inline double dirichlet_log_density(const std::vector<double>& alpha, const std::vector<double>& w) {
  double a0 = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    a0 += alpha[i];
    acc -= std::lgamma(alpha[i]);
    if (alpha[i] != 1.0) acc += (alpha[i] - 1.0) * std::log(w[i]);
  }
  return acc + std::lgamma(a0);
}

/// Moments of w_1 under a K=2 posterior proportional to
/// Dir(w; a1, a2) exp(-RSS(C w) / 2).
struct K2Posterior {
  double mean = 0.0;      // E[w_1]
  double variance = 0.0;  // Var[w_1]
  double log_norm = 0.0;  // ln of the integral of Dir(w) exp(-RSS/2) dw_1
};

/// Midpoint rule in t after the substitution w_1 = (1 - cos(pi t)) / 2,
/// which clusters nodes at both ends of (0, 1) and tames x^(a-1) endpoint
/// behaviour.
inline K2Posterior k2_posterior(const std::vector<double>& xs, const std::vector<double>& ys, double budget,
                                double a1, double a2, int nodes = 10000) {
  std::vector<double> logf(static_cast<std::size_t>(nodes)), w1(static_cast<std::size_t>(nodes)),
      jac(static_cast<std::size_t>(nodes));
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < nodes; ++i) {
    const double t = (i + 0.5) / nodes;
    const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * t));
    const double v = 0.5 * (1.0 + std::cos(std::numbers::pi * t));  // 1 - w without cancellation
    w1[i] = w;
    jac[i] = 0.5 * std::numbers::pi * std::sin(std::numbers::pi * t) / nodes;
    const double lf = dirichlet_log_density({a1, a2}, {w, v}) - 0.5 * rss(xs, ys, {budget * w, budget * v});
    logf[i] = lf;
    top = std::max(top, lf);
  }
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double f = std::exp(logf[i] - top) * jac[i];
    z += f;
    m1 += f * w1[i];
    m2 += f * w1[i] * w1[i];
  }
  K2Posterior out;
  out.mean = m1 / z;
  out.variance = m2 / z - out.mean * out.mean;
  out.log_norm = std::log(z) + top;
  return out;
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    }
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Least-squares polynomial fit through the normal equations; returns the RSS.
inline double normal_equations_rss(const std::vector<double>& xs, const std::vector<double>& ys, int order) {
  const auto k = static_cast<std::size_t>(order);
  std::vector<std::vector<double>> g(k, std::vector<double>(k, 0.0));
  std::vector<double> rhs(k, 0.0);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    for (std::size_t i = 0; i < k; ++i) {
      const double pi = std::pow(xs[n], static_cast<double>(i));
      rhs[i] += pi * ys[n];
      for (std::size_t j = 0; j < k; ++j) g[i][j] += pi * std::pow(xs[n], static_cast<double>(j));
    }
  }
  return rss(xs, ys, gauss_solve(g, rhs));
}

/// Argmax of the Dirichlet log-density over the simplex grid with spacing
/// 1/steps (K = 2 or 3). Coordinates with alpha_i < 1 are pinned to the zero
/// face, where the density is largest in that coordinate.
inline std::vector<double> simplex_grid_argmax(const std::vector<double>& alpha, int steps) {
  const std::size_t k = alpha.size();
  auto score = [&](const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (alpha[i] < 1.0) {
        if (w[i] != 0.0) return -std::numeric_limits<double>::infinity();
        continue;
      }
      if (alpha[i] == 1.0) continue;
      if (w[i] == 0.0) return -std::numeric_limits<double>::infinity();
      s += (alpha[i] - 1.0) * std::log(w[i]);
    }
    return s;
  };
  std::vector<double> best;
  double best_score = -std::numeric_limits<double>::infinity();
  const double h = 1.0 / steps;
  auto consider = [&](std::vector<double> w) {
    const double s = score(w);
    if (s > best_score) {
      best_score = s;
      best = std::move(w);
    }
  };
  if (k == 2) {
    for (int i = 0; i <= steps; ++i) consider({i * h, (steps - i) * h});
  } else {
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; i + j <= steps; ++j) consider({i * h, j * h, (steps - i - j) * h});
    }
  }
  return best;
}

/// Student-t density.
inline double t_density(double t, double df) {
  return std::exp(std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi) -
                  0.5 * (df + 1.0) * std::log1p(t * t / df));
}

/// P(T > t) for t >= 0 as 1/2 minus a composite Simpson integral over [0, t].
inline double t_sf_quadrature(double t, double df, int intervals = 1000000) {
  const double h = t / intervals;
  double acc = t_density(0.0, df) + t_density(t, df);
  for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * t_density(i * h, df);
  return 0.5 - acc * h / 3.0;
}

inline double cauchy_sf(double t) { return 0.5 - std::atan(t) / std::numbers::pi; }
inline double t2_sf(double t) { return 0.5 - t / (2.0 * std::sqrt(t * t + 2.0)); }

}  // namespace oracle
