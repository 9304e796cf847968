#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "balson/model.hpp"
#include "oracles.hpp"

using balson::Dataset;
using balson::DirichletParams;
using balson::ErrorKind;
using balson::ModelSpec;
using balson::ParameterVector;
using balson::RandomStream;
using balson::SimplexVector;

namespace {

const std::vector<double> kBenchTheta{0.0013, 0.0380, 0.0102, 0.9082, 0.0423};

Dataset random_dataset(int n, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[i] = rng.uniform();
    y[i] = 2.0 * rng.uniform() - 0.5;
  }
  return Dataset(x, y);
}

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(Dataset, Validation) {
  EXPECT_NO_THROW(Dataset());
  try {
    Dataset({1.0, 2.0}, {1.0});
    FAIL();
  } catch (const balson::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimensionMismatch);
  }
  EXPECT_THROW(Dataset({std::nan("")}, {1.0}), balson::Error);
  EXPECT_THROW((ModelSpec{1, 1.0}.validate()), balson::Error);
  EXPECT_THROW((ModelSpec{3, 0.0}.validate()), balson::Error);
}

TEST(Basis, Examples) {
  EXPECT_EQ(balson::basis(0.5, 3), (std::vector<double>{1, 0.5, 0.25}));
  EXPECT_EQ(balson::basis(0.0, 4), (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(balson::basis(1.0, 5), (std::vector<double>{1, 1, 1, 1, 1}));
}

TEST(Predict, Examples) {
  EXPECT_DOUBLE_EQ(balson::predict(ParameterVector({0, 1, 0, 0, 0}), 0.3), 0.3);
  EXPECT_EQ(balson::predict(ParameterVector({1, 0, 0, 0, 0}), 0.77), 1.0);
  EXPECT_EQ(balson::predict(ParameterVector(kBenchTheta), 0.0), 0.0013);
}

TEST(Predict, LinearInTheta) {
  RandomStream rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(5), b(5), c(5);
    for (int k = 0; k < 5; ++k) {
      a[k] = rng.normal();
      b[k] = rng.normal();
    }
    const double s = rng.normal(), x = rng.uniform();
    for (int k = 0; k < 5; ++k) c[k] = a[k] + s * b[k];
    EXPECT_NEAR(balson::predict(c, x), balson::predict(a, x) + s * balson::predict(b, x), 1e-12);
  }
}

TEST(LogLikelihood, Examples) {
  const ModelSpec spec{2, 1.0};
  EXPECT_EQ(balson::log_likelihood(Dataset(), SimplexVector({0.4, 0.6}), spec), 0.0);
  // y = 0.4 + 0.6 x at x = 0.5
  EXPECT_NEAR(balson::log_likelihood(Dataset({0.5}, {0.7}), SimplexVector({0.4, 0.6}), spec),
              -0.5 * std::log(2.0 * std::numbers::pi), 1e-15);
}

TEST(LogLikelihood, MatchesResidualOracle) {
  const Dataset d = random_dataset(10, 2);
  const SimplexVector w({0.1, 0.2, 0.3, 0.15, 0.25});
  const ModelSpec spec{5, 1.7};
  std::vector<double> theta;
  for (double v : w.values()) theta.push_back(1.7 * v);
  const double rss = oracle::rss(to_vec(d.inputs()), to_vec(d.targets()), theta);
  EXPECT_NEAR(balson::log_likelihood(d, w, spec), -5.0 * std::log(2.0 * std::numbers::pi) - 0.5 * rss, 1e-12);
}

TEST(LogLikelihood, DecreasesStrictlyWithResidual) {
  const ModelSpec spec{2, 1.0};
  const SimplexVector w({0.5, 0.5});
  double prev = std::numeric_limits<double>::infinity();
  // prediction at x = 1 is 1; move the target away
  for (double y = 1.0; y < 5.0; y += 0.1) {
    const double ll = balson::log_likelihood(Dataset({1.0}, {y}), w, spec);
    EXPECT_LT(ll, prev);
    prev = ll;
  }
}

TEST(LogPosterior, Examples) {
  const DirichletParams prior({2, 3, 1.5});
  const SimplexVector w({0.2, 0.5, 0.3});
  const ModelSpec spec{3, 1.0};
  EXPECT_EQ(balson::log_posterior_unnorm(Dataset(), w, prior, spec), balson::log_density(prior, w));
  const Dataset d = random_dataset(7, 3);
  // the uniform Dirichlet density is Gamma(K): exactly 1 on the K=2 simplex
  const SimplexVector w2({0.3, 0.7});
  EXPECT_EQ(balson::log_posterior_unnorm(d, w2, DirichletParams::uniform(2), ModelSpec{2, 1.0}),
            balson::log_likelihood(d, w2, ModelSpec{2, 1.0}));
  EXPECT_NEAR(balson::log_posterior_unnorm(d, w, DirichletParams::uniform(3), spec),
              balson::log_likelihood(d, w, spec) + std::log(2.0), 1e-14);
  EXPECT_THROW(balson::log_posterior_unnorm(d, SimplexVector({0.0, 0.5, 0.5}), DirichletParams({0.5, 1, 1}), spec),
               balson::Error);
}

TEST(LogPosterior, IntegralMatchesQuadratureOracle) {
  const Dataset d = random_dataset(5, 4);
  const ModelSpec spec{2, 1.0};
  const DirichletParams prior({1.5, 2.5});
  const int nodes = 10000;
  double total = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double t = (i + 0.5) / nodes;
    const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * t));
    const double jac = 0.5 * std::numbers::pi * std::sin(std::numbers::pi * t) / nodes;
    total += std::exp(balson::log_posterior_unnorm(d, SimplexVector({w, 1.0 - w}), prior, spec)) * jac;
  }
  const auto ref = oracle::k2_posterior(to_vec(d.inputs()), to_vec(d.targets()), 1.0, 1.5, 2.5, nodes);
  // the oracle leaves out the -(N/2) ln 2 pi constant
  EXPECT_NEAR(std::log(total), ref.log_norm - 2.5 * std::log(2.0 * std::numbers::pi), 1e-9);
}

TEST(Rescale, Examples) {
  EXPECT_EQ(balson::rescale(SimplexVector({0.5, 0.5}), 1.0), ParameterVector({0.5, 0.5}));
  EXPECT_EQ(balson::rescale(SimplexVector({1, 0, 0}), 2.0), ParameterVector({2, 0, 0}));
  const SimplexVector w({0.125, 0.375, 0.5});
  EXPECT_EQ(to_vec(balson::rescale(w, 1.0).values()), to_vec(w.values()));
  EXPECT_THROW(balson::rescale(w, 0.0), balson::Error);
}

TEST(Rescale, PreservesRatiosAndSum) {
  RandomStream rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> raw(4);
    double s = 0.0;
    for (double& v : raw) s += (v = rng.uniform());
    for (double& v : raw) v /= s;
    double sum = 0.0;
    for (double v : raw) sum += v;
    raw[3] += 1.0 - sum;
    const SimplexVector w(raw);
    const double c = 0.1 + 10.0 * rng.uniform();
    const ParameterVector th = balson::rescale(w, c);
    double tsum = 0.0;
    for (double v : th.values()) tsum += v;
    EXPECT_NEAR(tsum, c, 1e-12 * c);
    EXPECT_NEAR(th[0] / th[1], w[0] / w[1], 1e-12 * (w[0] / w[1]));
  }
}

TEST(SignedSplit, Examples) {
  EXPECT_EQ(balson::split_signed(std::vector<double>{1.5, -2}), ParameterVector({1.5, 0, 0, 2}));
  EXPECT_EQ(balson::split_signed(std::vector<double>{0, 0}), ParameterVector({0, 0, 0, 0}));
  EXPECT_EQ(balson::split_signed(std::vector<double>{-1}), ParameterVector({0, 1}));
  EXPECT_EQ(balson::merge_signed(ParameterVector({1.5, 0, 0, 2})), (std::vector<double>{1.5, -2}));
  EXPECT_EQ(balson::merge_signed(ParameterVector({0.3, 0.3})), (std::vector<double>{0}));
}

TEST(SignedSplit, Errors) {
  EXPECT_THROW(balson::merge_signed(ParameterVector({1, 2, 3})), balson::Error);
  EXPECT_THROW(balson::merge_signed(ParameterVector({1, -2})), balson::Error);
}

TEST(SignedSplit, RoundTripAndL1) {
  RandomStream rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(1 + trial % 8);
    for (double& x : v) x = rng.normal() * std::exp(4.0 * rng.normal());
    const ParameterVector s = balson::split_signed(v);
    EXPECT_EQ(balson::merge_signed(s), v);
    double l1 = 0.0, sum = 0.0;
    for (double x : v) l1 += std::fabs(x);
    for (double x : s.values()) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, l1, 1e-15 * l1);
  }
}

TEST(SignedSplit, PredictionsAgreeThroughSplitDesign) {
  const std::vector<double> xs{0.0, 0.25, 0.9};
  const std::vector<double> signed_theta{0.3, -0.7, 0.2};
  const Eigen::MatrixXd x = balson::split_design_matrix(xs, 3);
  const ParameterVector split = balson::split_signed(signed_theta);
  const Eigen::VectorXd fitted = x * balson::to_eigen(split.values());
  for (std::size_t n = 0; n < xs.size(); ++n) {
    EXPECT_NEAR(fitted(static_cast<Eigen::Index>(n)), oracle::poly(signed_theta, xs[n]), 1e-15);
  }
}
