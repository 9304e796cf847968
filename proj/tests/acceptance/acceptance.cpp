#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../oracles.hpp"
#include "balson/balson.hpp"

namespace fs = std::filesystem;
using balson::Dataset;
using balson::DirichletParams;
using balson::Method;
using balson::ModelSpec;
using balson::RandomStream;
using balson::SamplerConfig;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void report(int id, const char* name, const std::function<Verdict()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s %d %s (%.1fs): %s\n", v.pass ? "PASS" : "FAIL", id, name, secs, v.detail.c_str());
  std::fflush(stdout);
  g_failures += !v.pass;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

Dataset generated(const std::vector<double>& theta, int n, double sigma, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[i] = static_cast<double>(i) / (n - 1);
    y[i] = oracle::poly(theta, x[i]) + sigma * rng.normal();
  }
  return Dataset(x, y);
}

// weighted mean and variance of coordinate 0 with self-normalized standard errors
struct Estimate {
  double mean, variance, mean_se, variance_se;
};

Estimate estimate(const balson::WeightedSampleSet& set) {
  const auto row = set.samples.row(0);
  double m = 0.0, v = 0.0, se_m = 0.0, se_v = 0.0;
  for (std::size_t l = 0; l < set.size(); ++l) m += set.weights[l] * row(static_cast<Eigen::Index>(l));
  for (std::size_t l = 0; l < set.size(); ++l) {
    const double d = row(static_cast<Eigen::Index>(l)) - m;
    v += set.weights[l] * d * d;
  }
  for (std::size_t l = 0; l < set.size(); ++l) {
    const double w2 = set.weights[l] * set.weights[l];
    const double d = row(static_cast<Eigen::Index>(l)) - m;
    se_m += w2 * d * d;
    se_v += w2 * (d * d - v) * (d * d - v);
  }
  return {m, v, std::sqrt(se_m), std::sqrt(se_v)};
}

Verdict quadrature_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const Dataset d = generated({0.6, 0.4}, 10, 1.0, 1);
  const auto ref = oracle::k2_posterior(to_vec(d.inputs()), to_vec(d.targets()), 1.0, 1.0, 1.0, 10000);
  SamplerConfig cfg;
  cfg.sample_count = 50000;
  const ModelSpec spec{2, 1.0};
  RandomStream rng_rs(11), rng_is(12);
  const Estimate rs = estimate(balson::rejection_sample(d, DirichletParams::uniform(2), spec, cfg, rng_rs));
  const Estimate is = estimate(balson::importance_sample(d, DirichletParams::uniform(2), spec, cfg, rng_is));
  const double secs = seconds_since(start);
  auto z = [](double est, double truth, double se) { return std::fabs(est - truth) / se; };
  const double z_rs_m = z(rs.mean, ref.mean, rs.mean_se), z_rs_v = z(rs.variance, ref.variance, rs.variance_se);
  const double z_is_m = z(is.mean, ref.mean, is.mean_se), z_is_v = z(is.variance, ref.variance, is.variance_se);
  const bool pass = std::max({z_rs_m, z_rs_v, z_is_m, z_is_v}) <= 3.0 && secs < 10.0;
  return {pass, fmt("quad mean %.6f var %.6f; RS z=%.2f/%.2f IS z=%.2f/%.2f; %.2fs (limit 3 SE, 10 s)", ref.mean,
                    ref.variance, z_rs_m, z_rs_v, z_is_m, z_is_v, secs)};
}

Verdict prior_fixed_point() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> alpha{2, 3, 4};
  double worst = 0.0;
  std::string worst_method;
  for (auto m : {balson::SamplingMethod::kRS, balson::SamplingMethod::kIS, balson::SamplingMethod::kRSIRS,
                 balson::SamplingMethod::kISIRS}) {
    balson::BalsonConfig cfg;
    cfg.method = m;
    cfg.prior = DirichletParams(alpha);
    cfg.spec = {3, 1.0};
    cfg.sampler.sample_count = 50000;
    cfg.sampler.resample_rounds = 5;
    cfg.sampler.seed = 21;
    const auto r = balson::solve(Dataset(), cfg);
    for (std::size_t i = 0; i < 3; ++i) {
      const double rel = std::fabs(r.alpha_star[i] - alpha[i]) / alpha[i];
      if (rel > worst) {
        worst = rel;
        worst_method = balson::to_string(m);
      }
    }
  }
  const double secs = seconds_since(start);
  return {worst < 0.05 && secs < 30.0,
          fmt("max relative error %.4f (%s); %.2fs (limit 0.05, 30 s)", worst, worst_method.c_str(), secs)};
}

Verdict mode_rule() {
  RandomStream rng(31);
  int matched = 0, tried = 0;
  double worst = 0.0;
  while (tried < 100) {
    std::vector<double> a(3);
    for (double& v : a) v = 0.2 + 3.8 * rng.uniform();
    const bool any_low = std::any_of(a.begin(), a.end(), [](double v) { return v <= 1.0; });
    const bool any_high = std::any_of(a.begin(), a.end(), [](double v) { return v > 1.0; });
    if (!any_low || !any_high) continue;
    ++tried;
    const auto got = balson::mode(DirichletParams(a));
    const auto grid = oracle::simplex_grid_argmax(a, 1000);
    bool ok = true;
    for (std::size_t i = 0; i < 3; ++i) {
      worst = std::max(worst, std::fabs(got[i] - grid[i]));
      ok = ok && std::fabs(got[i] - grid[i]) <= 1e-3 && ((got[i] == 0.0) == (a[i] <= 1.0));
    }
    matched += ok;
  }
  return {matched == 100, fmt("%d/100 match the grid argmax and zero pattern; max deviation %.2e (cell 1e-3)",
                              matched, worst)};
}

struct DefaultRun {
  balson::ResultTable table;
  balson::Summary summary;
};

const DefaultRun& default_run() {
  static const DefaultRun run = [] {
    balson::ExperimentConfig cfg;
    cfg.threads = std::max(1u, std::thread::hardware_concurrency());
    balson::ResultTable table = balson::run_experiment(cfg);
    balson::Summary summary = balson::summarize(table);
    return DefaultRun{std::move(table), std::move(summary)};
  }();
  return run;
}

Verdict default_ordering() {
  const auto& s = default_run().summary;
  auto mean_mse = [&](Method m) { return s.find(m)->mean_mse; };
  auto mean_sp = [&](Method m) { return s.find(m)->mean_sparsity; };
  std::string detail;
  for (const auto& ms : s.methods) {
    detail += fmt("%s mse %.4f sp %.4f ok %d; ", balson::to_string(ms.method), ms.mean_mse, ms.mean_sparsity, ms.n_ok);
  }
  const double rsirs = mean_mse(Method::kBalsonRSIRS);
  const bool order = rsirs < mean_mse(Method::kLasso) && rsirs < mean_mse(Method::kIP) &&
                     rsirs < mean_mse(Method::kBayesianLasso);
  const bool sparse = mean_sp(Method::kBalsonRSIRS) >= 0.70 && mean_sp(Method::kBalsonISIRS) >= 0.70;
  const bool range = rsirs >= 0.004 && rsirs <= 0.035;
  detail += fmt("ordering %s, sparsity>=0.70 %s, RSIRS mse in [0.004,0.035] %s", order ? "yes" : "no",
                sparse ? "yes" : "no", range ? "yes" : "no");
  return {order && sparse && range, detail};
}

Verdict default_significance() {
  const auto& table = default_run().table;
  std::string detail;
  bool pass = true;
  auto check = [&](Method b, balson::Metric metric, const char* label) {
    const auto cell = balson::compare_methods(table, Method::kBalsonRSIRS, b, metric);
    const bool ok = cell.p.has_value() && *cell.p < 0.05;
    pass = pass && ok;
    detail += fmt("%s vs %s p=%s; ", label, balson::to_string(b),
                  cell.p ? fmt("%.3g", *cell.p).c_str() : cell.status.c_str());
  };
  for (Method b : {Method::kLasso, Method::kIP, Method::kBayesianLasso}) check(b, balson::Metric::kSparsity, "sparsity");
  for (Method b : {Method::kIP, Method::kBayesianLasso}) check(b, balson::Metric::kMse, "mse");
  detail += "(limit 0.05)";
  return {pass, detail};
}

Verdict metric_ground_truth() {
  const double generator = balson::sparsity(std::vector<double>{0.0013, 0.0380, 0.0102, 0.9082, 0.0423});
  const double one_hot = balson::sparsity(std::vector<double>{0, 0, 0, 1, 0});
  const double equal = balson::sparsity(std::vector<double>{0.25, 0.25, 0.25, 0.25});
  return {std::fabs(generator - 0.9200) <= 5e-5 && one_hot == 1.0 && equal == 0.0,
          fmt("true theta %.6f (0.9200 +- 5e-5), one-hot %.17g, all-equal %.17g", generator, one_hot, equal)};
}

Verdict signed_reduction() {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = generated({0.6, -0.4}, 50, 0.01, 700 + seed);
    balson::BalsonConfig cfg;
    cfg.method = balson::SamplingMethod::kRSIRS;
    cfg.spec = {2, 1.0};
    cfg.sampler.sample_count = 10000;
    cfg.sampler.seed = 800 + seed;
    const auto fit = balson::solve_signed(d, cfg);
    hits += fit.theta[0] > 0.0 && fit.theta[1] < 0.0;
  }
  RandomStream rng(41);
  int identical = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(1 + trial % 10);
    for (double& x : v) x = rng.uniform() < 0.2 ? 0.0 : rng.normal() * std::exp(3.0 * rng.normal());
    identical += balson::merge_signed(balson::split_signed(v)) == v;
  }
  return {hits >= 18 && identical == 1000,
          fmt("sign pattern recovered %d/20 (need 18); merge(split(v)) == v for %d/1000", hits, identical)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict bench_determinism() {
  const fs::path root = fs::temp_directory_path() / "balson_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "config.json";
  std::ofstream(cfg) << R"({"repetitions": 6, "sampler": {"sample_count": 2000, "resample_rounds": 3},
    "baselines": {"gibbs": {"iterations": 2000, "burn_in": 500}}})";
  std::vector<fs::path> dirs;
  for (const char* run : {"seq_a", "seq_b", "par_a", "par_b"}) {
    const fs::path out = root / run;
    const int threads = run[0] == 's' ? 1 : 4;
    const std::string cmd = std::string(BALSON_CLI_PATH) + " bench --config " + cfg.string() + " --out-dir " +
                            out.string() + " --threads " + std::to_string(threads) + " > /dev/null";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, std::string("bench failed: ") + cmd};
    dirs.push_back(out);
  }
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    const std::string n = e.path().filename().string();
    if (e.path().extension() == ".csv" && n != "timings.csv") names.push_back(n);
  }
  std::sort(names.begin(), names.end());
  int mismatches = 0;
  for (const auto& n : names) {
    const std::string ref = slurp(dirs[0] / n);
    for (std::size_t i = 1; i < dirs.size(); ++i) mismatches += slurp(dirs[i] / n) != ref;
  }
  std::string list;
  for (const auto& n : names) list += n + " ";
  return {mismatches == 0 && names.size() >= 5,
          fmt("%zu CSV files compared across 2 sequential + 2 parallel runs, %d mismatches: %s", names.size(),
              mismatches, list.c_str())};
}

Verdict special_functions() {
  double worst1 = 0.0, worst2 = 0.0;
  for (int i = -5000; i <= 5000; ++i) {
    const double t = i * 0.01;
    worst1 = std::max(worst1, std::fabs(balson::student_t_sf(t, 1) - oracle::cauchy_sf(t)));
    worst2 = std::max(worst2, std::fabs(balson::student_t_sf(t, 2) - oracle::t2_sf(t)));
  }
  return {worst1 <= 1e-10 && worst2 <= 1e-10,
          fmt("max |error| df=1 %.2e, df=2 %.2e over 10001 points (limit 1e-10)", worst1, worst2)};
}

}  // namespace

int main() {
  report(1, "quadrature equivalence", quadrature_equivalence);
  report(2, "prior fixed point", prior_fixed_point);
  report(3, "mode rule", mode_rule);
  report(4, "default experiment ordering", default_ordering);
  report(5, "default experiment significance", default_significance);
  report(6, "metric ground truth", metric_ground_truth);
  report(7, "signed reduction", signed_reduction);
  report(8, "bench determinism", bench_determinism);
  report(9, "special functions", special_functions);
  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
