#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "balson/dirichlet.hpp"
#include "balson/error.hpp"

namespace balson {

/// Paired scalar observations (x_n, y_n). An empty dataset is valid and
/// leaves the posterior equal to the prior.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<double> inputs, std::vector<double> targets)
      : inputs_(std::move(inputs)), targets_(std::move(targets)) {
    require(inputs_.size() == targets_.size(), ErrorKind::kDimensionMismatch,
            "dataset has " + std::to_string(inputs_.size()) + " inputs but " +
                std::to_string(targets_.size()) + " targets");
    for (std::size_t n = 0; n < inputs_.size(); ++n) {
      require(std::isfinite(inputs_[n]) && std::isfinite(targets_[n]), ErrorKind::kInvalidArgument,
              "dataset row " + std::to_string(n) + " is not finite");
    }
  }

  std::size_t size() const { return inputs_.size(); }
  bool empty() const { return inputs_.empty(); }
  std::span<const double> inputs() const { return inputs_; }
  std::span<const double> targets() const { return targets_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<double> inputs_;
  std::vector<double> targets_;
};

/// Polynomial order K (number of coefficients) and L1 budget C.
struct ModelSpec {
  int order = 5;
  double budget = 1.0;

  void validate() const {
    require(order >= 2, ErrorKind::kInvalidArgument, "model order must be >= 2");
    require(std::isfinite(budget) && budget > 0.0, ErrorKind::kInvalidArgument, "budget C must be > 0");
  }
};

/// Model coefficients theta.
class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(std::vector<double> theta) : theta_(std::move(theta)) {
    for (double v : theta_) {
      require(std::isfinite(v), ErrorKind::kInvalidArgument, "parameter components must be finite");
    }
  }

  std::size_t size() const { return theta_.size(); }
  double operator[](std::size_t i) const { return theta_[i]; }
  std::span<const double> values() const { return theta_; }

  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;

 private:
  std::vector<double> theta_;
};

/// [1, x, x^2, ..., x^(order-1)].
inline std::vector<double> basis(double x, int order) {
  require(order >= 1, ErrorKind::kInvalidArgument, "basis order must be >= 1");
  std::vector<double> phi(static_cast<std::size_t>(order));
  double p = 1.0;
  for (auto& v : phi) {
    v = p;
    p *= x;
  }
  return phi;
}

/// theta^T Phi(x), Horner evaluation.
inline double predict(std::span<const double> theta, double x) {
  double acc = 0.0;
  for (auto it = theta.rbegin(); it != theta.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline double predict(const ParameterVector& theta, double x) { return predict(theta.values(), x); }

/// N x order matrix of monomial rows.
inline Eigen::MatrixXd design_matrix(std::span<const double> inputs, int order) {
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(inputs.size()), order);
  for (Eigen::Index n = 0; n < phi.rows(); ++n) {
    double p = 1.0;
    for (int k = 0; k < order; ++k) {
      phi(n, k) = p;
      p *= inputs[static_cast<std::size_t>(n)];
    }
  }
  return phi;
}

/// Rows [Phi(x)^T, -Phi(x)^T] for the signed-to-nonnegative reduction.
inline Eigen::MatrixXd split_design_matrix(std::span<const double> inputs, int signed_order) {
  const Eigen::MatrixXd phi = design_matrix(inputs, signed_order);
  Eigen::MatrixXd out(phi.rows(), 2 * signed_order);
  out << phi, -phi;
  return out;
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Linear least-squares problem on the scaled simplex: design X, targets y,
/// budget C. Every BALSON sampler works on this form; polynomial datasets and
/// the signed reduction both lower to it.
struct LinearProblem {
  Eigen::MatrixXd design;
  Eigen::VectorXd targets;
  double budget = 1.0;

  std::size_t dimension() const { return static_cast<std::size_t>(design.cols()); }
  std::size_t observations() const { return static_cast<std::size_t>(design.rows()); }

  /// ||y - X (C w)||^2.
  double rss(std::span<const double> omega) const {
    if (design.rows() == 0) return 0.0;
    const Eigen::VectorXd theta =
        budget * Eigen::Map<const Eigen::VectorXd>(omega.data(), static_cast<Eigen::Index>(omega.size()));
    return (targets - design * theta).squaredNorm();
  }
};

inline LinearProblem polynomial_problem(const Dataset& data, const ModelSpec& spec) {
  spec.validate();
  return {design_matrix(data.inputs(), spec.order), to_eigen(data.targets()), spec.budget};
}

inline LinearProblem signed_polynomial_problem(const Dataset& data, const ModelSpec& signed_spec) {
  require(signed_spec.order >= 1, ErrorKind::kInvalidArgument, "signed order must be >= 1");
  require(signed_spec.budget > 0.0, ErrorKind::kInvalidArgument, "budget C must be > 0");
  return {split_design_matrix(data.inputs(), signed_spec.order), to_eigen(data.targets()), signed_spec.budget};
}

inline constexpr double kLogTwoPi = 1.8378770664093454836;

/// Unit-variance Gaussian log-likelihood: -(N/2) ln 2pi - RSS / 2.
inline double log_likelihood(const LinearProblem& problem, const SimplexVector& omega) {
  require(omega.size() == problem.dimension(), ErrorKind::kDimensionMismatch,
          "log_likelihood: omega dimension does not match the design");
  const double n = static_cast<double>(problem.observations());
  return -0.5 * n * kLogTwoPi - 0.5 * problem.rss(omega.values());
}

inline double log_likelihood(const Dataset& data, const SimplexVector& omega, const ModelSpec& spec) {
  return log_likelihood(polynomial_problem(data, spec), omega);
}

/// Log-likelihood plus Dirichlet log-prior; the objective maximized by the
/// constrained least-squares solution.
inline double log_posterior_unnorm(const LinearProblem& problem, const SimplexVector& omega,
                                   const DirichletParams& prior) {
  const double lp = log_density(prior, omega);
  return log_likelihood(problem, omega) + lp;
}

inline double log_posterior_unnorm(const Dataset& data, const SimplexVector& omega, const DirichletParams& prior,
                                   const ModelSpec& spec) {
  return log_posterior_unnorm(polynomial_problem(data, spec), omega, prior);
}

/// theta = C * omega.
inline ParameterVector rescale(const SimplexVector& omega, double budget) {
  require(std::isfinite(budget) && budget > 0.0, ErrorKind::kInvalidArgument, "rescale needs C > 0");
  std::vector<double> theta(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) theta[i] = budget * omega[i];
  return ParameterVector(std::move(theta));
}

/// [max(v, 0), max(-v, 0)] for a signed vector v of length K~.
inline ParameterVector split_signed(std::span<const double> theta_signed) {
  const std::size_t k = theta_signed.size();
  std::vector<double> out(2 * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double v = theta_signed[i];
    require(std::isfinite(v), ErrorKind::kInvalidArgument, "split_signed: non-finite component");
    if (v > 0.0) out[i] = v;
    if (v < 0.0) out[i + k] = -v;
  }
  return ParameterVector(std::move(out));
}

/// theta_i - theta_{i+K~}.
inline std::vector<double> merge_signed(const ParameterVector& theta_nonneg) {
  const std::size_t n = theta_nonneg.size();
  require(n % 2 == 0, ErrorKind::kInvalidArgument, "merge_signed needs an even length");
  const std::size_t k = n / 2;
  std::vector<double> out(k);
  for (std::size_t i = 0; i < n; ++i) {
    require(theta_nonneg[i] >= 0.0, ErrorKind::kInvalidArgument, "merge_signed needs nonnegative components");
  }
  for (std::size_t i = 0; i < k; ++i) out[i] = theta_nonneg[i] - theta_nonneg[i + k];
  return out;
}

}  // namespace balson
