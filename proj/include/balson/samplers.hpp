#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "balson/dirichlet.hpp"
#include "balson/error.hpp"
#include "balson/model.hpp"
#include "balson/random.hpp"

namespace balson {

struct SamplerConfig {
  std::int64_t sample_count = 10000;  // L
  // R; 0 means only the seeding pass runs
  std::int64_t resample_rounds = 5;
  // cap on rejection-sampling proposals; 0 selects 1000 * L
  std::int64_t max_proposals = 0;
  std::uint64_t seed = 0;

  std::int64_t proposal_cap() const { return max_proposals > 0 ? max_proposals : 1000 * sample_count; }

  void validate() const {
    require(sample_count >= 100, ErrorKind::kInvalidArgument, "sample_count must be >= 100");
    require(resample_rounds >= 0, ErrorKind::kInvalidArgument, "resample_rounds must be >= 0");
    require(max_proposals >= 0, ErrorKind::kInvalidArgument, "max_proposals must be >= 0");
    require(proposal_cap() >= sample_count, ErrorKind::kInvalidArgument, "max_proposals must be >= sample_count");
  }
};

/// L simplex samples (one per column) with normalized weights.
struct WeightedSampleSet {
  Eigen::MatrixXd samples;  // K x L
  std::vector<double> weights;
  double ess = 0.0;
  double acceptance_rate = 1.0;
  std::int64_t proposals = 0;

  std::size_t size() const { return weights.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(samples.rows()); }

  SimplexVector sample(std::size_t l) const {
    const auto col = samples.col(static_cast<Eigen::Index>(l));
    return SimplexVector(std::vector<double>(col.data(), col.data() + col.size()));
  }
};

struct NormalizedWeights {
  std::vector<double> weights;
  double ess = 0.0;
};

/// Shift by the largest log-weight, exponentiate, normalize; ess = 1 / sum w^2.
inline NormalizedWeights normalize_log_weights(std::span<const double> log_weights) {
  require(!log_weights.empty(), ErrorKind::kInvalidArgument, "no weights to normalize");
  double top = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    require(!std::isnan(lw), ErrorKind::kNumericalFailure, "NaN log-weight");
    top = std::max(top, lw);
  }
  require(std::isfinite(top), ErrorKind::kDegenerateWeight, "every log-weight is -inf");
  NormalizedWeights out;
  out.weights.resize(log_weights.size());
  double sum = 0.0;
  for (std::size_t l = 0; l < log_weights.size(); ++l) {
    out.weights[l] = std::exp(log_weights[l] - top);
    sum += out.weights[l];
  }
  double sum_sq = 0.0;
  for (double& w : out.weights) {
    w /= sum;
    sum_sq += w * w;
  }
  out.ess = 1.0 / sum_sq;
  return out;
}

/// Unconstrained min_theta ||y - X theta||^2 (minimum-norm solution when X is
/// rank deficient). Bounds RSS(C w) from below for every w, which makes
/// exp(-(RSS - bound) / 2) a valid rejection acceptance probability.
inline double rss_lower_bound(const LinearProblem& problem) {
  if (problem.design.rows() == 0) return 0.0;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(problem.design);
  const Eigen::VectorXd theta = cod.solve(problem.targets);
  return (problem.targets - problem.design * theta).squaredNorm();
}

inline double rss_lower_bound(const Dataset& data, int order) {
  return rss_lower_bound(polynomial_problem(data, ModelSpec{order, 1.0}));
}

namespace detail {

inline void check_prior(const LinearProblem& problem, const DirichletParams& prior) {
  require(prior.size() == problem.dimension(), ErrorKind::kDimensionMismatch,
          "prior has " + std::to_string(prior.size()) + " components, design has " +
              std::to_string(problem.dimension()) + " columns");
}

// RSS(C w) = y'y - 2 C w'X'y + C^2 w'X'X w; O(K^2) per evaluation once the
// Gram matrix is formed.
class ResidualEvaluator {
 public:
  explicit ResidualEvaluator(const LinearProblem& problem)
      : gram_(problem.budget * problem.budget * (problem.design.transpose() * problem.design)),
        xty_(problem.budget * (problem.design.transpose() * problem.targets)),
        yty_(problem.targets.squaredNorm()) {}

  double operator()(const Eigen::Ref<const Eigen::VectorXd>& omega) const {
    // clamp rounding below zero; a NaN passes through to the caller's check
    const double r = yty_ - 2.0 * xty_.dot(omega) + omega.dot(gram_ * omega);
    return r < 0.0 ? 0.0 : r;
  }

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd xty_;
  double yty_;
};

inline void fill_sample(const DirichletParams& prior, RandomStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
  const SimplexVector w = sample(prior, rng);
  for (std::size_t i = 0; i < w.size(); ++i) out(static_cast<Eigen::Index>(i)) = w[i];
}

}  // namespace detail

/// Rejection sampling with the prior as proposal. A proposal w is accepted
/// with probability exp(-(RSS(C w) - rss_lower_bound) / 2).
inline WeightedSampleSet rejection_sample(const LinearProblem& problem, const DirichletParams& prior,
                                          const SamplerConfig& cfg, RandomStream& rng) {
  cfg.validate();
  detail::check_prior(problem, prior);
  const auto k = static_cast<Eigen::Index>(prior.size());
  const auto count = static_cast<Eigen::Index>(cfg.sample_count);
  const double bound = rss_lower_bound(problem);
  const detail::ResidualEvaluator rss_of(problem);
  const std::int64_t cap = cfg.proposal_cap();

  WeightedSampleSet set;
  set.samples.resize(k, count);
  Eigen::VectorXd candidate(k);
  Eigen::Index accepted = 0;
  std::int64_t proposals = 0;
  while (accepted < count) {
    if (proposals >= cap) {
      fail(ErrorKind::kRejectionBudgetExceeded, std::to_string(accepted) + " of " + std::to_string(count) +
                                                    " samples accepted after " + std::to_string(proposals) +
                                                    " proposals");
    }
    ++proposals;
    detail::fill_sample(prior, rng, candidate);
    const double rss = rss_of(candidate);
    require(!std::isnan(rss), ErrorKind::kNumericalFailure, "NaN residual");
    const double accept = std::min(1.0, std::exp(-0.5 * (rss - bound)));
    if (rng.uniform() <= accept) set.samples.col(accepted++) = candidate;
  }
  set.weights.assign(static_cast<std::size_t>(count), 1.0 / static_cast<double>(count));
  set.ess = static_cast<double>(count);
  set.proposals = proposals;
  set.acceptance_rate = static_cast<double>(count) / static_cast<double>(proposals);
  return set;
}

/// Importance sampling with the prior as proposal; log-weight -RSS(C w) / 2.
inline WeightedSampleSet importance_sample(const LinearProblem& problem, const DirichletParams& prior,
                                           const SamplerConfig& cfg, RandomStream& rng) {
  cfg.validate();
  detail::check_prior(problem, prior);
  const auto k = static_cast<Eigen::Index>(prior.size());
  const auto count = static_cast<Eigen::Index>(cfg.sample_count);

  WeightedSampleSet set;
  set.samples.resize(k, count);
  std::vector<double> log_weights(static_cast<std::size_t>(count));
  const detail::ResidualEvaluator rss_of(problem);
  for (Eigen::Index l = 0; l < count; ++l) {
    detail::fill_sample(prior, rng, set.samples.col(l));
    const double rss = rss_of(set.samples.col(l));
    require(!std::isnan(rss), ErrorKind::kNumericalFailure, "NaN residual");
    log_weights[static_cast<std::size_t>(l)] = -0.5 * rss;
  }
  NormalizedWeights nw = normalize_log_weights(log_weights);
  set.weights = std::move(nw.weights);
  set.ess = nw.ess;
  set.proposals = count;
  set.acceptance_rate = 1.0;
  return set;
}

inline WeightedSampleSet rejection_sample(const Dataset& data, const DirichletParams& prior, const ModelSpec& spec,
                                          const SamplerConfig& cfg, RandomStream& rng) {
  return rejection_sample(polynomial_problem(data, spec), prior, cfg, rng);
}

inline WeightedSampleSet importance_sample(const Dataset& data, const DirichletParams& prior, const ModelSpec& spec,
                                           const SamplerConfig& cfg, RandomStream& rng) {
  return importance_sample(polynomial_problem(data, spec), prior, cfg, rng);
}

/// Weighted per-dimension mean and (weight-normalized, biased) variance.
inline Moments weighted_moments(const WeightedSampleSet& set) {
  require(set.size() == static_cast<std::size_t>(set.samples.cols()), ErrorKind::kDimensionMismatch,
          "weights and samples differ in count");
  if (!(set.ess > 1.0)) fail(ErrorKind::kDegenerateWeight, "effective sample size " + std::to_string(set.ess));
  const Eigen::Map<const Eigen::VectorXd> w(set.weights.data(), static_cast<Eigen::Index>(set.weights.size()));
  const Eigen::VectorXd mean = set.samples * w;
  const Eigen::MatrixXd centered = set.samples.colwise() - mean;
  const Eigen::VectorXd variance = centered.array().square().matrix() * w;
  return {to_std(mean), to_std(variance)};
}

struct RoundDiagnostics {
  int round = 0;
  bool rejection = false;
  double ess = 0.0;
  double acceptance_rate = 1.0;
  std::int64_t proposals = 0;
  double alpha0 = 0.0;  // concentration of the matched Dirichlet
};

struct IteratedResult {
  DirichletParams alpha;
  std::vector<RoundDiagnostics> rounds;
};

namespace detail {

// Round 0 seeds with RS or IS from the prior; rounds 1..R run IS with the
// previous round's matched Dirichlet as both proposal and prior, so each
// round reweights by the likelihood alone. Round r draws from rng.split(r).
inline IteratedResult iterate_resampling(const LinearProblem& problem, const DirichletParams& prior,
                                         const SamplerConfig& cfg, const RandomStream& rng, bool seed_with_rejection) {
  cfg.validate();
  DirichletParams current = prior;
  std::vector<RoundDiagnostics> rounds;
  for (std::int64_t r = 0; r <= cfg.resample_rounds; ++r) {
    const bool rejection = seed_with_rejection && r == 0;
    try {
      RandomStream stream = rng.split(static_cast<std::uint64_t>(r));
      const WeightedSampleSet set = rejection ? rejection_sample(problem, current, cfg, stream)
                                              : importance_sample(problem, current, cfg, stream);
      current = match_moments(weighted_moments(set));
      rounds.push_back({static_cast<int>(r), rejection, set.ess, set.acceptance_rate, set.proposals,
                        current.concentration()});
    } catch (const Error& e) {
      throw Error(e.kind(), "round " + std::to_string(r) + ": " + e.detail());
    }
  }
  return {std::move(current), std::move(rounds)};
}

}  // namespace detail

/// Rejection-sampling seed followed by R importance-resampling rounds.
inline IteratedResult rsirs(const LinearProblem& problem, const DirichletParams& prior, const SamplerConfig& cfg,
                            const RandomStream& rng) {
  return detail::iterate_resampling(problem, prior, cfg, rng, true);
}

/// Importance-sampling seed followed by R importance-resampling rounds.
inline IteratedResult isirs(const LinearProblem& problem, const DirichletParams& prior, const SamplerConfig& cfg,
                            const RandomStream& rng) {
  return detail::iterate_resampling(problem, prior, cfg, rng, false);
}

inline IteratedResult rsirs(const Dataset& data, const DirichletParams& prior, const ModelSpec& spec,
                            const SamplerConfig& cfg, const RandomStream& rng) {
  return rsirs(polynomial_problem(data, spec), prior, cfg, rng);
}

inline IteratedResult isirs(const Dataset& data, const DirichletParams& prior, const ModelSpec& spec,
                            const SamplerConfig& cfg, const RandomStream& rng) {
  return isirs(polynomial_problem(data, spec), prior, cfg, rng);
}

}  // namespace balson
