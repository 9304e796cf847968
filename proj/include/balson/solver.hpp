#pragma once

#include <cctype>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "balson/dirichlet.hpp"
#include "balson/error.hpp"
#include "balson/model.hpp"
#include "balson/random.hpp"
#include "balson/samplers.hpp"

namespace balson {

enum class SamplingMethod { kRS, kIS, kRSIRS, kISIRS };

inline const char* to_string(SamplingMethod m) {
  switch (m) {
    case SamplingMethod::kRS: return "RS";
    case SamplingMethod::kIS: return "IS";
    case SamplingMethod::kRSIRS: return "RSIRS";
    case SamplingMethod::kISIRS: return "ISIRS";
  }
  return "?";
}

inline std::optional<SamplingMethod> parse_sampling_method(std::string_view s) {
  std::string lower(s);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "rs") return SamplingMethod::kRS;
  if (lower == "is") return SamplingMethod::kIS;
  if (lower == "rsirs") return SamplingMethod::kRSIRS;
  if (lower == "isirs") return SamplingMethod::kISIRS;
  return std::nullopt;
}

struct BalsonConfig {
  SamplingMethod method = SamplingMethod::kRSIRS;
  // empty means the uniform Dirichlet of the problem's dimension
  std::optional<DirichletParams> prior;
  ModelSpec spec;
  SamplerConfig sampler;
};

struct FitDiagnostics {
  std::string method;
  bool uniform_prior = true;
  std::vector<double> prior_alpha;
  std::vector<RoundDiagnostics> rounds;
  std::vector<double> alpha0_trajectory;
  bool mode_fallback = false;  // all alpha*_i <= 1, omega* is the posterior mean
  double wall_seconds = 0.0;
};

struct FitReport {
  ParameterVector theta_star;
  DirichletParams alpha_star;
  SimplexVector omega_star;
  FitDiagnostics diagnostics;
};

/// Sample the posterior, moment-match a Dirichlet, take its sparse mode and
/// rescale by C. Sampling draws from RandomStream(cfg.sampler.seed).
inline FitReport solve(const LinearProblem& problem, const BalsonConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.sampler.validate();
  require(problem.budget > 0.0, ErrorKind::kInvalidArgument, "budget C must be > 0");
  const DirichletParams prior = cfg.prior ? *cfg.prior : DirichletParams::uniform(problem.dimension());
  require(prior.size() == problem.dimension(), ErrorKind::kDimensionMismatch,
          "prior dimension " + std::to_string(prior.size()) + " does not match model dimension " +
              std::to_string(problem.dimension()));

  const RandomStream rng(cfg.sampler.seed);
  FitDiagnostics diag;
  diag.method = to_string(cfg.method);
  diag.uniform_prior = !cfg.prior.has_value();
  diag.prior_alpha.assign(prior.alpha().begin(), prior.alpha().end());

  std::optional<DirichletParams> alpha_star;
  switch (cfg.method) {
    case SamplingMethod::kRS:
    case SamplingMethod::kIS: {
      // single pass on the same substream the iterated schemes use for round 0
      const bool rejection = cfg.method == SamplingMethod::kRS;
      RandomStream stream = rng.split(0);
      const WeightedSampleSet set = rejection ? rejection_sample(problem, prior, cfg.sampler, stream)
                                              : importance_sample(problem, prior, cfg.sampler, stream);
      alpha_star = match_moments(weighted_moments(set));
      diag.rounds.push_back({0, rejection, set.ess, set.acceptance_rate, set.proposals, alpha_star->concentration()});
      break;
    }
    case SamplingMethod::kRSIRS:
    case SamplingMethod::kISIRS: {
      IteratedResult it = cfg.method == SamplingMethod::kRSIRS ? rsirs(problem, prior, cfg.sampler, rng)
                                                               : isirs(problem, prior, cfg.sampler, rng);
      alpha_star = std::move(it.alpha);
      diag.rounds = std::move(it.rounds);
      break;
    }
  }
  for (const auto& r : diag.rounds) diag.alpha0_trajectory.push_back(r.alpha0);

  std::optional<SimplexVector> omega;
  try {
    omega = mode(*alpha_star);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kModeUndefined) throw;
    omega = mean_point(*alpha_star);
    diag.mode_fallback = true;
  }
  ParameterVector theta = rescale(*omega, problem.budget);
  diag.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(theta), std::move(*alpha_star), std::move(*omega), std::move(diag)};
}

inline FitReport solve(const Dataset& data, const BalsonConfig& cfg) {
  return solve(polynomial_problem(data, cfg.spec), cfg);
}

struct SignedFit {
  std::vector<double> theta;  // signed coefficients, length K~
  FitReport report;           // the underlying 2K~-dimensional fit
};

/// Ordinary L1-constrained fit through the nonnegative split: cfg.spec.order
/// is the signed order K~ and the sampler works in dimension 2K~ on rows
/// [Phi(x)^T, -Phi(x)^T].
inline SignedFit solve_signed(const Dataset& data, const BalsonConfig& cfg) {
  FitReport report = solve(signed_polynomial_problem(data, cfg.spec), cfg);
  std::vector<double> theta = merge_signed(report.theta_star);
  return {std::move(theta), std::move(report)};
}

}  // namespace balson
