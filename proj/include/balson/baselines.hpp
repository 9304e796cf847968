#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "balson/error.hpp"
#include "balson/model.hpp"
#include "balson/random.hpp"

namespace balson {

enum class BaselineMethod { kLasso, kInteriorPoint, kBayesianLasso };

inline const char* to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::kLasso: return "LASSO";
    case BaselineMethod::kInteriorPoint: return "IP";
    case BaselineMethod::kBayesianLasso: return "BayesianLASSO";
  }
  return "?";
}

struct LassoOptions {
  double budget_tolerance = 1e-4;  // | ||theta||_1 - C | at the selected lambda
  int max_bisections = 200;
  int max_sweeps = 200000;
  double sweep_tolerance = 1e-13;  // max coordinate change, scaled by the column norm
};

struct InteriorPointOptions {
  double initial_mu = 1.0;
  double mu_factor = 0.2;
  double newton_tolerance = 1e-8;  // Newton decrement sqrt(g' H^-1 g)
  double gap_tolerance = 1e-10;    // (K + 1) mu at termination
  int max_outer_iterations = 100;
  int max_newton_iterations = 200;
};

struct GibbsOptions {
  int iterations = 6000;
  int burn_in = 1000;
  // Gamma(shape, rate) hyperprior on the squared shrinkage parameter
  double lambda_shape = 1.0;
  double lambda_rate = 1.0;
  std::uint64_t seed = 0;
};

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kLasso;
  double budget = 1.0;
  LassoOptions lasso;
  InteriorPointOptions ip;
  GibbsOptions gibbs;

  void validate() const {
    require(budget > 0.0, ErrorKind::kInvalidArgument, "budget C must be > 0");
    require(lasso.budget_tolerance > 0.0 && lasso.sweep_tolerance > 0.0 && lasso.max_sweeps > 0 &&
                lasso.max_bisections > 0,
            ErrorKind::kInvalidArgument, "lasso tolerances must be > 0");
    require(ip.initial_mu > 0.0 && ip.mu_factor > 0.0 && ip.mu_factor < 1.0 && ip.newton_tolerance > 0.0 &&
                ip.gap_tolerance > 0.0 && ip.max_outer_iterations > 0 && ip.max_newton_iterations > 0,
            ErrorKind::kInvalidArgument, "interior-point settings must be positive, factor in (0,1)");
    require(gibbs.burn_in >= 0 && gibbs.iterations > gibbs.burn_in, ErrorKind::kInvalidArgument,
            "gibbs iterations must exceed burn-in");
    require(gibbs.lambda_shape > 0.0 && gibbs.lambda_rate > 0.0, ErrorKind::kInvalidArgument,
            "gibbs hyperprior parameters must be > 0");
  }
};

// ---------------------------------------------------------------------------
// LASSO

struct LassoResult {
  std::vector<double> theta;
  double lambda = 0.0;
  int sweeps = 0;
  std::vector<double> objective_trace;  // after each sweep
};

namespace detail {

// Exact LASSO solution on the current sign pattern: solve
// G_AA b_A = X_A^T y - (lambda / 2) sign(b_A) and accept it only if the signs
// persist and every inactive coordinate satisfies |X_j^T (y - X b)| <= lambda / 2.
inline bool polish_active_set(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xty, double lambda,
                              Eigen::VectorXd& beta) {
  const Eigen::Index k = gram.rows();
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (beta(j) != 0.0) active.push_back(j);
  }
  Eigen::VectorXd candidate = Eigen::VectorXd::Zero(k);
  const auto na = static_cast<Eigen::Index>(active.size());
  if (na > 0) {
    Eigen::MatrixXd g(na, na);
    Eigen::VectorXd rhs(na);
    for (Eigen::Index a = 0; a < na; ++a) {
      for (Eigen::Index b = 0; b < na; ++b) g(a, b) = gram(active[a], active[b]);
      rhs(a) = xty(active[a]) - 0.5 * lambda * (beta(active[a]) > 0.0 ? 1.0 : -1.0);
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::VectorXd sol = ldlt.solve(rhs);
    for (Eigen::Index a = 0; a < na; ++a) {
      if (!std::isfinite(sol(a)) || sol(a) * beta(active[a]) <= 0.0) return false;
      candidate(active[a]) = sol(a);
    }
  }
  const Eigen::VectorXd grad = xty - gram * candidate;
  const double slack = 0.5 * lambda * (1.0 + 1e-9) + 1e-12 * (1.0 + xty.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < k; ++j) {
    if (candidate(j) == 0.0 && std::fabs(grad(j)) > slack) return false;
  }
  beta = candidate;
  return true;
}

}  // namespace detail

/// Cyclic coordinate descent for ||y - X b||^2 + lambda ||b||_1, run on the
/// Gram form so a sweep costs O(K^2). Every few sweeps the current sign
/// pattern is tried as an exact active-set solution, which finishes the slow
/// linear tail on ill-conditioned designs.
inline LassoResult lasso_coordinate_descent(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xty, double yty,
                                            double lambda, const LassoOptions& opt,
                                            const Eigen::VectorXd* warm_start = nullptr) {
  constexpr int kPolishEvery = 20;
  const Eigen::Index k = gram.rows();
  Eigen::VectorXd beta = warm_start ? *warm_start : Eigen::VectorXd::Zero(k);
  // gradient of the smooth part is 2 (G b - X^T y); keep G b up to date
  Eigen::VectorXd gb = gram * beta;
  auto objective = [&] { return yty - 2.0 * xty.dot(beta) + beta.dot(gb) + lambda * beta.lpNorm<1>(); };

  LassoResult out;
  out.lambda = lambda;
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double z = gram(j, j);
      if (z <= 0.0) {
        // an all-zero column only sees the penalty
        if (beta(j) != 0.0) {
          gb -= gram.col(j) * beta(j);
          beta(j) = 0.0;
        }
        continue;
      }
      const double rho = xty(j) - gb(j) + z * beta(j);
      const double shrunk = std::copysign(std::max(std::fabs(rho) - 0.5 * lambda, 0.0), rho) / z;
      const double delta = shrunk - beta(j);
      if (delta != 0.0) {
        gb += gram.col(j) * delta;
        beta(j) = shrunk;
        max_change = std::max(max_change, std::fabs(delta) * std::sqrt(z));
      }
    }
    out.objective_trace.push_back(objective());
    out.sweeps = sweep;
    if (max_change <= opt.sweep_tolerance * (1.0 + std::sqrt(std::max(yty, 0.0)))) {
      out.theta = to_std(beta);
      return out;
    }
    if (sweep % kPolishEvery == 0) {
      Eigen::VectorXd polished = beta;
      if (detail::polish_active_set(gram, xty, lambda, polished)) {
        const Eigen::VectorXd saved = beta, saved_gb = gb;
        beta = polished;
        gb = gram * beta;
        const double f = objective();
        if (f <= out.objective_trace.back()) {
          out.objective_trace.push_back(f);
          out.theta = to_std(beta);
          return out;
        }
        beta = saved;
        gb = saved_gb;
      }
    }
  }
  fail(ErrorKind::kNonConvergence, "lasso coordinate descent did not converge in " + std::to_string(opt.max_sweeps) +
                                       " sweeps (residual norm " +
                                       std::to_string(std::sqrt(std::max(0.0, yty - 2.0 * xty.dot(beta) +
                                                                               beta.dot(gb)))) +
                                       ")");
}

inline LassoResult lasso_coordinate_descent(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                                            double lambda, const LassoOptions& opt = {}) {
  return lasso_coordinate_descent(design.transpose() * design, design.transpose() * targets,
                                  targets.squaredNorm(), lambda, opt);
}

/// LASSO with lambda chosen by bisection so that ||theta||_1 = C; if the
/// unpenalized least-squares solution already fits the budget it is returned.
inline LassoResult lasso_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets, double budget,
                             const LassoOptions& opt = {}) {
  const Eigen::Index k = design.cols();
  if (design.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    const Eigen::VectorXd ls = cod.solve(targets);
    if (ls.lpNorm<1>() <= budget) return {to_std(ls), 0.0, 0, {}};
  } else {
    return {std::vector<double>(static_cast<std::size_t>(k), 0.0), 0.0, 0, {}};
  }
  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::VectorXd xty = design.transpose() * targets;
  const double yty = targets.squaredNorm();

  double hi = 2.0 * xty.cwiseAbs().maxCoeff();  // theta = 0 for lambda >= hi
  double lo = 0.0;
  LassoResult best{std::vector<double>(static_cast<std::size_t>(k), 0.0), hi, 0, {}};
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(k);
  for (int it = 0; it < opt.max_bisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    LassoResult r = lasso_coordinate_descent(gram, xty, yty, mid, opt, &warm);
    warm = to_eigen(r.theta);
    const double l1 = warm.lpNorm<1>();
    if (std::fabs(l1 - budget) <= opt.budget_tolerance) return r;
    if (l1 > budget) {
      lo = mid;
    } else {
      hi = mid;
      best = std::move(r);
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  // interval collapsed: the tight feasible side is within budget
  return best;
}

inline std::vector<double> lasso_fit(const Dataset& data, const ModelSpec& spec, const BaselineConfig& cfg) {
  cfg.validate();
  return lasso_fit(design_matrix(data.inputs(), spec.order), to_eigen(data.targets()), cfg.budget, cfg.lasso).theta;
}

// ---------------------------------------------------------------------------
// Interior point

struct InteriorPointResult {
  std::vector<double> theta;
  int outer_iterations = 0;
  int newton_iterations = 0;
  double final_mu = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();  // smallest theta_i or C - sum, over all iterates
};

/// Primal log-barrier method for min ||y - X theta||^2 s.t. theta >= 0,
/// sum theta <= C. The barrier weight mu shrinks geometrically and each
/// centering problem is solved by damped Newton.
inline InteriorPointResult ip_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets, double budget,
                                  const InteriorPointOptions& opt = {}) {
  const Eigen::Index k = design.cols();
  const Eigen::MatrixXd g2 = 2.0 * design.transpose() * design;
  const Eigen::VectorXd c2 = 2.0 * design.transpose() * targets;
  const double yty = targets.squaredNorm();

  Eigen::VectorXd theta = Eigen::VectorXd::Constant(k, budget / (2.0 * static_cast<double>(k)));
  InteriorPointResult out;
  auto slack = [&](const Eigen::VectorXd& t) { return budget - t.sum(); };
  auto barrier_objective = [&](const Eigen::VectorXd& t, double mu) {
    const double s = slack(t);
    if (s <= 0.0 || t.minCoeff() <= 0.0) return std::numeric_limits<double>::infinity();
    return yty - c2.dot(t) + 0.5 * t.dot(g2 * t) - mu * (t.array().log().sum() + std::log(s));
  };
  auto note_slack = [&](const Eigen::VectorXd& t) {
    out.min_slack = std::min({out.min_slack, t.minCoeff(), slack(t)});
  };
  note_slack(theta);

  double mu = opt.initial_mu;
  for (int outer = 0; outer < opt.max_outer_iterations; ++outer) {
    int newton = 0;
    for (;; ++newton) {
      if (newton >= opt.max_newton_iterations) {
        fail(ErrorKind::kNonConvergence, "Newton iterations exhausted at barrier level mu=" + std::to_string(mu));
      }
      const double s = slack(theta);
      const Eigen::ArrayXd inv = theta.array().inverse();
      const Eigen::VectorXd grad = (g2 * theta - c2).array() - mu * inv + mu / s;
      Eigen::MatrixXd hess = g2;
      hess.diagonal().array() += mu * inv.square();
      hess.array() += mu / (s * s);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
      if (ldlt.info() != Eigen::Success) {
        fail(ErrorKind::kNumericalFailure, "singular Newton system at barrier level mu=" + std::to_string(mu));
      }
      const Eigen::VectorXd step = -ldlt.solve(grad);
      const double decrement = -grad.dot(step);
      if (!std::isfinite(decrement)) {
        fail(ErrorKind::kNumericalFailure, "non-finite Newton step at barrier level mu=" + std::to_string(mu));
      }
      if (std::sqrt(std::max(decrement, 0.0)) <= opt.newton_tolerance) break;

      // largest step keeping theta > 0 and the budget slack > 0
      double t = 1.0;
      for (Eigen::Index i = 0; i < k; ++i) {
        if (step(i) < 0.0) t = std::min(t, -0.99 * theta(i) / step(i));
      }
      if (step.sum() > 0.0) t = std::min(t, 0.99 * s / step.sum());
      const double f0 = barrier_objective(theta, mu);
      Eigen::VectorXd candidate = theta + t * step;
      int backtracks = 0;
      while (!(barrier_objective(candidate, mu) <= f0 - 0.25 * t * decrement)) {
        t *= 0.5;
        candidate = theta + t * step;
        if (++backtracks > 60) break;
      }
      if (backtracks > 60) break;  // no further progress possible at this precision
      if (candidate == theta) break;  // step below double resolution
      theta = candidate;
      note_slack(theta);
      ++out.newton_iterations;
    }
    out.outer_iterations = outer + 1;
    out.final_mu = mu;
    if (static_cast<double>(k + 1) * mu < opt.gap_tolerance) break;
    mu *= opt.mu_factor;
  }
  out.theta = to_std(theta);
  return out;
}

inline ParameterVector ip_fit(const Dataset& data, const ModelSpec& spec, const BaselineConfig& cfg) {
  cfg.validate();
  return ParameterVector(
      ip_fit(design_matrix(data.inputs(), spec.order), to_eigen(data.targets()), cfg.budget, cfg.ip).theta);
}

// ---------------------------------------------------------------------------
// Bayesian LASSO

/// Gibbs sampler for y ~ N(X b, I) with the Laplace prior written as a scale
/// mixture b_j | tau_j ~ N(0, tau_j^2), tau_j^2 ~ Exp(lambda^2 / 2),
/// lambda^2 ~ Gamma(shape, rate). Returns the post-burn-in mean of b.
inline std::vector<double> bayesian_lasso_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                                              const GibbsOptions& opt, RandomStream& rng) {
  const Eigen::Index k = design.cols();
  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::VectorXd xty = design.transpose() * targets;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd inv_tau2 = Eigen::VectorXd::Ones(k);
  double lambda2 = opt.lambda_shape / opt.lambda_rate;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd z(k);

  for (int it = 0; it < opt.iterations; ++it) {
    // b | tau ~ N(A^-1 X^T y, A^-1), A = X^T X + diag(1 / tau^2)
    Eigen::MatrixXd a = gram;
    a.diagonal() += inv_tau2;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
      fail(ErrorKind::kNumericalFailure, "conditional precision not positive definite at iteration " +
                                             std::to_string(it));
    }
    const Eigen::VectorXd mean = llt.solve(xty);
    for (Eigen::Index j = 0; j < k; ++j) z(j) = rng.normal();
    beta = mean + llt.matrixU().solve(z);
    if (!beta.allFinite()) {
      fail(ErrorKind::kNumericalFailure, "non-finite coefficient draw at iteration " + std::to_string(it));
    }

    // 1 / tau_j^2 | b ~ InverseGaussian(sqrt(lambda^2 / b_j^2), lambda^2)
    const double lam = std::sqrt(lambda2);
    double tau2_sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double b = std::max(std::fabs(beta(j)), 1e-300);
      double v = rng.inverse_gaussian(lam / b, lambda2);
      v = std::clamp(v, 1e-12, 1e12);
      inv_tau2(j) = v;
      tau2_sum += 1.0 / v;
    }

    // lambda^2 | tau ~ Gamma(K + shape, rate + sum tau^2 / 2)
    lambda2 = rng.gamma(static_cast<double>(k) + opt.lambda_shape) / (opt.lambda_rate + 0.5 * tau2_sum);

    if (it >= opt.burn_in) acc += beta;
  }
  acc /= static_cast<double>(opt.iterations - opt.burn_in);
  return to_std(acc);
}

inline std::vector<double> bayesian_lasso_fit(const Dataset& data, const ModelSpec& spec, const BaselineConfig& cfg,
                                              RandomStream& rng) {
  cfg.validate();
  return bayesian_lasso_fit(design_matrix(data.inputs(), spec.order), to_eigen(data.targets()), cfg.gibbs, rng);
}

}  // namespace balson
