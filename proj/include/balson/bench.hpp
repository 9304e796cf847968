#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "balson/baselines.hpp"
#include "balson/error.hpp"
#include "balson/metrics.hpp"
#include "balson/model.hpp"
#include "balson/random.hpp"
#include "balson/solver.hpp"

namespace balson {

enum class Method { kLasso, kIP, kBayesianLasso, kBalsonRS, kBalsonIS, kBalsonRSIRS, kBalsonISIRS };

inline constexpr std::array<Method, 7> kAllMethods = {Method::kLasso,       Method::kIP,       Method::kBayesianLasso,
                                                      Method::kBalsonRS,    Method::kBalsonIS, Method::kBalsonRSIRS,
                                                      Method::kBalsonISIRS};

inline const char* to_string(Method m) {
  switch (m) {
    case Method::kLasso: return "LASSO";
    case Method::kIP: return "IP";
    case Method::kBayesianLasso: return "BayesianLASSO";
    case Method::kBalsonRS: return "BALSON-RS";
    case Method::kBalsonIS: return "BALSON-IS";
    case Method::kBalsonRSIRS: return "BALSON-RSIRS";
    case Method::kBalsonISIRS: return "BALSON-ISIRS";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : kAllMethods) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

inline bool is_balson(Method m) {
  return m == Method::kBalsonRS || m == Method::kBalsonIS || m == Method::kBalsonRSIRS || m == Method::kBalsonISIRS;
}

inline std::size_t method_index(Method m) { return static_cast<std::size_t>(m); }

/// Experiment defaults reproduce the polynomial-fitting setup: K = 5,
/// N_tr = 100, N_te = 1000, C = 1, 100 repetitions, all seven methods.
struct ExperimentConfig {
  std::vector<double> true_theta = {0.0013, 0.0380, 0.0102, 0.9082, 0.0423};
  int n_train = 100;
  int n_test = 1000;
  double budget = 1.0;
  int repetitions = 100;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  std::optional<std::vector<double>> prior;  // BALSON prior; empty = uniform
  SamplerConfig sampler;
  BaselineConfig baselines;
  std::uint64_t base_seed = 20170301;
  std::string output_dir = "bench_out";
  int threads = 1;

  int order() const { return static_cast<int>(true_theta.size()); }

  void validate() const {
    require(true_theta.size() >= 2, ErrorKind::kInvalidArgument, "true_theta needs K >= 2");
    for (double v : true_theta) {
      require(std::isfinite(v) && v >= 0.0, ErrorKind::kInvalidArgument, "true_theta must be finite and >= 0");
    }
    require(n_train >= order(), ErrorKind::kInvalidArgument, "n_train must be >= K");
    require(n_test >= 1, ErrorKind::kInvalidArgument, "n_test must be >= 1");
    require(std::isfinite(budget) && budget > 0.0, ErrorKind::kInvalidArgument, "budget must be > 0");
    require(repetitions >= 1, ErrorKind::kInvalidArgument, "repetitions must be >= 1");
    require(threads >= 1, ErrorKind::kInvalidArgument, "threads must be >= 1");
    if (prior) {
      const DirichletParams check(*prior);
      require(check.size() == true_theta.size(), ErrorKind::kDimensionMismatch, "prior length must equal K");
    }
    sampler.validate();
    baselines.validate();
  }
};

// ---------------------------------------------------------------------------
// JSON config

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      fail(ErrorKind::kInvalidArgument, std::string("unknown field '") + it.key() + "' in " + where);
    }
  }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Parse an ExperimentConfig; omitted fields keep their defaults.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  using detail::read_field;
  ExperimentConfig cfg;
  try {
    require(j.is_object(), ErrorKind::kInvalidArgument, "config must be a JSON object");
    detail::reject_unknown(j,
                           {"true_theta", "n_train", "n_test", "budget", "repetitions", "methods", "prior", "sampler",
                            "baselines", "base_seed", "output_dir", "threads"},
                           "config");
    read_field(j, "true_theta", cfg.true_theta);
    read_field(j, "n_train", cfg.n_train);
    read_field(j, "n_test", cfg.n_test);
    read_field(j, "budget", cfg.budget);
    read_field(j, "repetitions", cfg.repetitions);
    read_field(j, "base_seed", cfg.base_seed);
    read_field(j, "output_dir", cfg.output_dir);
    read_field(j, "threads", cfg.threads);
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& name : j.at("methods")) {
        auto m = parse_method(name.get<std::string>());
        require(m.has_value(), ErrorKind::kInvalidArgument, "unknown method '" + name.get<std::string>() + "'");
        require(std::find(cfg.methods.begin(), cfg.methods.end(), *m) == cfg.methods.end(),
                ErrorKind::kInvalidArgument, "duplicate method '" + name.get<std::string>() + "'");
        cfg.methods.push_back(*m);
      }
      std::sort(cfg.methods.begin(), cfg.methods.end());
    }
    if (j.contains("prior") && !j.at("prior").is_null()) {
      const auto& p = j.at("prior");
      if (p.is_string()) {
        require(p.get<std::string>() == "uniform", ErrorKind::kInvalidArgument, "prior must be a list or \"uniform\"");
      } else {
        cfg.prior = p.get<std::vector<double>>();
      }
    }
    if (j.contains("sampler")) {
      const auto& s = j.at("sampler");
      detail::reject_unknown(s, {"sample_count", "resample_rounds", "max_proposals", "seed"}, "sampler");
      read_field(s, "sample_count", cfg.sampler.sample_count);
      read_field(s, "resample_rounds", cfg.sampler.resample_rounds);
      read_field(s, "max_proposals", cfg.sampler.max_proposals);
      read_field(s, "seed", cfg.sampler.seed);
    }
    if (j.contains("baselines")) {
      const auto& b = j.at("baselines");
      detail::reject_unknown(b, {"lasso", "ip", "gibbs"}, "baselines");
      if (b.contains("lasso")) {
        const auto& l = b.at("lasso");
        detail::reject_unknown(l, {"budget_tolerance", "max_bisections", "max_sweeps", "sweep_tolerance"}, "lasso");
        read_field(l, "budget_tolerance", cfg.baselines.lasso.budget_tolerance);
        read_field(l, "max_bisections", cfg.baselines.lasso.max_bisections);
        read_field(l, "max_sweeps", cfg.baselines.lasso.max_sweeps);
        read_field(l, "sweep_tolerance", cfg.baselines.lasso.sweep_tolerance);
      }
      if (b.contains("ip")) {
        const auto& p = b.at("ip");
        detail::reject_unknown(p,
                               {"initial_mu", "mu_factor", "newton_tolerance", "gap_tolerance", "max_outer_iterations",
                                "max_newton_iterations"},
                               "ip");
        read_field(p, "initial_mu", cfg.baselines.ip.initial_mu);
        read_field(p, "mu_factor", cfg.baselines.ip.mu_factor);
        read_field(p, "newton_tolerance", cfg.baselines.ip.newton_tolerance);
        read_field(p, "gap_tolerance", cfg.baselines.ip.gap_tolerance);
        read_field(p, "max_outer_iterations", cfg.baselines.ip.max_outer_iterations);
        read_field(p, "max_newton_iterations", cfg.baselines.ip.max_newton_iterations);
      }
      if (b.contains("gibbs")) {
        const auto& g = b.at("gibbs");
        detail::reject_unknown(g, {"iterations", "burn_in", "lambda_shape", "lambda_rate", "seed"}, "gibbs");
        read_field(g, "iterations", cfg.baselines.gibbs.iterations);
        read_field(g, "burn_in", cfg.baselines.gibbs.burn_in);
        read_field(g, "lambda_shape", cfg.baselines.gibbs.lambda_shape);
        read_field(g, "lambda_rate", cfg.baselines.gibbs.lambda_rate);
        read_field(g, "seed", cfg.baselines.gibbs.seed);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("config: ") + e.what());
  }
  cfg.baselines.budget = cfg.budget;
  cfg.validate();
  return cfg;
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json methods = nlohmann::json::array();
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  nlohmann::json j;
  j["true_theta"] = cfg.true_theta;
  j["n_train"] = cfg.n_train;
  j["n_test"] = cfg.n_test;
  j["budget"] = cfg.budget;
  j["repetitions"] = cfg.repetitions;
  j["methods"] = methods;
  j["prior"] = cfg.prior ? nlohmann::json(*cfg.prior) : nlohmann::json("uniform");
  j["sampler"] = {{"sample_count", cfg.sampler.sample_count},
                  {"resample_rounds", cfg.sampler.resample_rounds},
                  {"max_proposals", cfg.sampler.proposal_cap()}};
  const auto& b = cfg.baselines;
  j["baselines"] = {{"lasso",
                     {{"budget_tolerance", b.lasso.budget_tolerance},
                      {"max_bisections", b.lasso.max_bisections},
                      {"max_sweeps", b.lasso.max_sweeps},
                      {"sweep_tolerance", b.lasso.sweep_tolerance}}},
                    {"ip",
                     {{"initial_mu", b.ip.initial_mu},
                      {"mu_factor", b.ip.mu_factor},
                      {"newton_tolerance", b.ip.newton_tolerance},
                      {"gap_tolerance", b.ip.gap_tolerance},
                      {"max_outer_iterations", b.ip.max_outer_iterations},
                      {"max_newton_iterations", b.ip.max_newton_iterations}}},
                    {"gibbs",
                     {{"iterations", b.gibbs.iterations},
                      {"burn_in", b.gibbs.burn_in},
                      {"lambda_shape", b.gibbs.lambda_shape},
                      {"lambda_rate", b.gibbs.lambda_rate}}}};
  j["base_seed"] = cfg.base_seed;
  return j;
}

// ---------------------------------------------------------------------------
// Data generation

struct GeneratedData {
  Dataset train;
  std::vector<double> test_inputs;
  std::vector<double> test_truth;
};

/// n equally spaced points on [0, 1], endpoints included.
inline std::vector<double> equally_spaced(int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  if (n == 1) return {0.0};
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(n - 1);
  return x;
}

inline RandomStream repetition_stream(std::uint64_t base_seed, int repetition) {
  return RandomStream(base_seed).split(static_cast<std::uint64_t>(repetition));
}

/// Training targets get standard-normal noise from the repetition's
/// substream; the test curve is noise-free.
inline GeneratedData generate_dataset(const ExperimentConfig& cfg, int repetition) {
  RandomStream noise = repetition_stream(cfg.base_seed, repetition).split(0);
  std::vector<double> x = equally_spaced(cfg.n_train);
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) y[n] = predict(cfg.true_theta, x[n]) + noise.normal();
  GeneratedData out{Dataset(std::move(x), std::move(y)), equally_spaced(cfg.n_test), {}};
  out.test_truth.reserve(out.test_inputs.size());
  for (double xt : out.test_inputs) out.test_truth.push_back(predict(cfg.true_theta, xt));
  return out;
}

/// FNV-1a over the raw bytes of the training data.
inline std::uint64_t dataset_hash(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::span<const double> v) {
    for (double d : v) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &d, sizeof(double));
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  };
  feed(data.inputs());
  feed(data.targets());
  return h;
}

// ---------------------------------------------------------------------------
// Running

struct ResultRow {
  Method method = Method::kLasso;
  int repetition = 0;
  std::string status = "ok";  // "ok" or the error message
  double mse = std::numeric_limits<double>::quiet_NaN();
  double sparsity = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> theta;
  std::uint64_t dataset_hash = 0;
  std::uint64_t seed = 0;
  // BALSON diagnostics; NaN for baselines
  double acceptance_rate = std::numeric_limits<double>::quiet_NaN();
  double min_ess = std::numeric_limits<double>::quiet_NaN();
  double final_alpha0 = std::numeric_limits<double>::quiet_NaN();
  bool mode_fallback = false;
  double wall_seconds = 0.0;

  bool ok() const { return status == "ok"; }
};

/// One row per (method, repetition), sorted by method then repetition.
struct ResultTable {
  ExperimentConfig config;
  std::vector<ResultRow> rows;

  std::vector<const ResultRow*> rows_for(Method m) const {
    std::vector<const ResultRow*> out;
    for (const auto& r : rows) {
      if (r.method == m) out.push_back(&r);
    }
    return out;
  }
};

inline std::uint64_t method_seed(std::uint64_t base_seed, int repetition, Method m) {
  return repetition_stream(base_seed, repetition).split(1 + method_index(m)).next_u64();
}

/// Fit one method on one repetition's data. Fit failures become the row's
/// status instead of propagating.
inline ResultRow run_method(const ExperimentConfig& cfg, const GeneratedData& data, int repetition, Method m) {
  ResultRow row;
  row.method = m;
  row.repetition = repetition;
  row.dataset_hash = dataset_hash(data.train);
  row.seed = method_seed(cfg.base_seed, repetition, m);
  const ModelSpec spec{cfg.order(), cfg.budget};
  const auto start = std::chrono::steady_clock::now();
  try {
    BaselineConfig bcfg = cfg.baselines;
    bcfg.budget = cfg.budget;
    switch (m) {
      case Method::kLasso: row.theta = lasso_fit(data.train, spec, bcfg); break;
      case Method::kIP: {
        const ParameterVector p = ip_fit(data.train, spec, bcfg);
        row.theta.assign(p.values().begin(), p.values().end());
        break;
      }
      case Method::kBayesianLasso: {
        bcfg.gibbs.seed = row.seed;
        RandomStream rng(row.seed);
        row.theta = bayesian_lasso_fit(data.train, spec, bcfg, rng);
        break;
      }
      default: {
        BalsonConfig b;
        b.method = m == Method::kBalsonRS     ? SamplingMethod::kRS
                   : m == Method::kBalsonIS   ? SamplingMethod::kIS
                   : m == Method::kBalsonRSIRS ? SamplingMethod::kRSIRS
                                               : SamplingMethod::kISIRS;
        if (cfg.prior) b.prior = DirichletParams(*cfg.prior);
        b.spec = spec;
        b.sampler = cfg.sampler;
        b.sampler.seed = row.seed;
        const FitReport rep = solve(data.train, b);
        row.theta.assign(rep.theta_star.values().begin(), rep.theta_star.values().end());
        row.acceptance_rate = rep.diagnostics.rounds.front().acceptance_rate;
        row.min_ess = std::numeric_limits<double>::infinity();
        for (const auto& r : rep.diagnostics.rounds) row.min_ess = std::min(row.min_ess, r.ess);
        row.final_alpha0 = rep.alpha_star.concentration();
        row.mode_fallback = rep.diagnostics.mode_fallback;
        break;
      }
    }
    std::vector<double> fitted;
    fitted.reserve(data.test_inputs.size());
    for (double x : data.test_inputs) fitted.push_back(predict(row.theta, x));
    row.mse = mse(data.test_truth, fitted);
    row.sparsity = sparsity(row.theta);
  } catch (const Error& e) {
    row.status = e.what();
  } catch (const std::exception& e) {
    row.status = std::string("unexpected: ") + e.what();
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

/// Every repetition regenerates its noisy training set from
/// (base_seed, repetition) and all methods fit that same set. Repetitions
/// run on cfg.threads workers; the table is identical for any thread count.
inline ResultTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto reps = static_cast<std::size_t>(cfg.repetitions);
  const std::size_t nm = cfg.methods.size();
  std::vector<ResultRow> grid(reps * nm);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      const GeneratedData data = generate_dataset(cfg, static_cast<int>(r));
      for (std::size_t mi = 0; mi < nm; ++mi) {
        grid[mi * reps + r] = run_method(cfg, data, static_cast<int>(r), cfg.methods[mi]);
      }
    }
  };
  const int workers = std::min<int>(cfg.threads, cfg.repetitions);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  ResultTable table{cfg, std::move(grid)};
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return a.method != b.method ? a.method < b.method : a.repetition < b.repetition;
  });
  return table;
}

// ---------------------------------------------------------------------------
// Summary

struct MethodSummary {
  Method method = Method::kLasso;
  int n_ok = 0;
  double mean_mse = std::numeric_limits<double>::quiet_NaN();
  double mean_sparsity = std::numeric_limits<double>::quiet_NaN();
  double median_mse = std::numeric_limits<double>::quiet_NaN();
  double median_sparsity = std::numeric_limits<double>::quiet_NaN();
};

struct PValueCell {
  std::optional<double> p;
  double t = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";  // "ok", "degenerate", or "insufficient data"
};

struct PValueMatrix {
  std::vector<Method> rows;     // BALSON variants
  std::vector<Method> columns;  // baselines
  std::vector<std::vector<PValueCell>> cells;

  bool empty() const { return rows.empty() || columns.empty(); }
};

struct Summary {
  std::vector<MethodSummary> methods;
  PValueMatrix mse_pvalues;
  PValueMatrix sparsity_pvalues;

  const MethodSummary* find(Method m) const {
    for (const auto& s : methods) {
      if (s.method == m) return &s;
    }
    return nullptr;
  }
};

enum class Metric { kMse, kSparsity };

namespace detail {

inline double metric_of(const ResultRow& r, Metric metric) { return metric == Metric::kMse ? r.mse : r.sparsity; }

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Paired t-test of method a against method b over repetitions where both
/// produced a finite metric.
inline PValueCell compare_methods(const ResultTable& table, Method a, Method b, Metric metric) {
  std::vector<double> va, vb;
  const auto ra = table.rows_for(a);
  const auto rb = table.rows_for(b);
  for (const ResultRow* x : ra) {
    for (const ResultRow* y : rb) {
      if (x->repetition != y->repetition) continue;
      const double mx = detail::metric_of(*x, metric), my = detail::metric_of(*y, metric);
      if (std::isfinite(mx) && std::isfinite(my)) {
        va.push_back(mx);
        vb.push_back(my);
      }
    }
  }
  PValueCell cell;
  if (va.size() < 2) {
    cell.status = "insufficient data";
    return cell;
  }
  try {
    const TTestResult r = paired_t_test(va, vb);
    cell.p = r.p;
    cell.t = r.t;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kDegenerateTTest) throw;
    cell.status = "degenerate";
  }
  return cell;
}

inline Summary summarize(const ResultTable& table) {
  Summary s;
  for (Method m : table.config.methods) {
    MethodSummary ms;
    ms.method = m;
    std::vector<double> mses, sps;
    for (const ResultRow* r : table.rows_for(m)) {
      if (std::isfinite(r->mse)) mses.push_back(r->mse);
      if (std::isfinite(r->sparsity)) sps.push_back(r->sparsity);
      if (r->ok()) ++ms.n_ok;
    }
    auto mean = [](const std::vector<double>& v) {
      if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
      double acc = 0.0;
      for (double x : v) acc += x;
      return acc / static_cast<double>(v.size());
    };
    ms.mean_mse = mean(mses);
    ms.mean_sparsity = mean(sps);
    ms.median_mse = detail::median(mses);
    ms.median_sparsity = detail::median(sps);
    s.methods.push_back(ms);
  }
  for (PValueMatrix* mat : {&s.mse_pvalues, &s.sparsity_pvalues}) {
    for (Method m : table.config.methods) (is_balson(m) ? mat->rows : mat->columns).push_back(m);
  }
  if (table.config.repetitions >= 2) {
    for (auto [mat, metric] : {std::pair{&s.mse_pvalues, Metric::kMse}, std::pair{&s.sparsity_pvalues, Metric::kSparsity}}) {
      for (Method r : mat->rows) {
        std::vector<PValueCell> line;
        for (Method c : mat->columns) line.push_back(compare_methods(table, r, c, metric));
        mat->cells.push_back(std::move(line));
      }
    }
  } else {
    s.mse_pvalues = {};
    s.sparsity_pvalues = {};
  }
  return s;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class OutputFile {
 public:
  OutputFile(const std::filesystem::path& path, std::vector<std::filesystem::path>& manifest)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
    manifest.push_back(path);
  }
  ~OutputFile() = default;

  std::ostream& stream() { return out_; }

  void close() {
    out_.close();
    if (!out_) fail(ErrorKind::kIo, "failed writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline void write_pvalues(const PValueMatrix& mat, std::ostream& os) {
  os << "method";
  for (Method c : mat.columns) os << ',' << to_string(c);
  os << '\n';
  for (std::size_t i = 0; i < mat.rows.size(); ++i) {
    os << to_string(mat.rows[i]);
    for (const auto& cell : mat.cells[i]) os << ',' << (cell.p ? fmt_double(*cell.p) : cell.status);
    os << '\n';
  }
}

// Minimal self-contained SVG charts.
struct Frame {
  double width = 640, height = 400, left = 60, right = 20, top = 30, bottom = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline void svg_axes(std::ostream& os, const Frame& f, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << f.width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << f.left << "\" y1=\"" << f.py(f.y0) << "\" x2=\"" << f.width - f.right << "\" y2=\""
     << f.py(f.y0) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << f.left << "\" y1=\"" << f.py(f.y0) << "\" x2=\"" << f.left << "\" y2=\"" << f.py(f.y1)
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 5.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", y);
    os << "<line x1=\"" << f.left - 4 << "\" y1=\"" << f.py(y) << "\" x2=\"" << f.left << "\" y2=\"" << f.py(y)
       << "\" stroke=\"black\"/><text x=\"" << f.left - 6 << "\" y=\"" << f.py(y) + 4
       << "\" text-anchor=\"end\">" << buf << "</text>\n";
  }
}

inline const char* palette(std::size_t i) {
  static constexpr std::array<const char*, 8> kColors = {"#000000", "#1f77b4", "#ff7f0e", "#2ca02c",
                                                         "#d62728", "#9467bd", "#8c564b", "#e377c2"};
  return kColors[i % kColors.size()];
}

}  // namespace detail

/// Write runs.csv, timings.csv, summary.csv, the two p-value tables,
/// curves.csv, config.json and (optionally) SVG charts into out_dir.
/// Returns the paths written.
inline std::vector<std::filesystem::path> emit_outputs(const ResultTable& table, const Summary& summary,
                                                       const std::filesystem::path& out_dir, bool svg = false) {
  using detail::fmt_double;
  std::vector<std::filesystem::path> manifest;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + out_dir.string() + ": " + ec.message());
  const ExperimentConfig& cfg = table.config;

  {
    nlohmann::json echo = to_json(cfg);
    echo["data_reading"] =
        "training noise is regenerated per repetition from (base_seed, repetition); all methods within a "
        "repetition fit the identical training set";
    nlohmann::json ledger = nlohmann::json::array();
    for (int r = 0; r < cfg.repetitions; ++r) {
      nlohmann::json entry{{"repetition", r}};
      nlohmann::json seeds = nlohmann::json::object();
      for (Method m : cfg.methods) seeds[to_string(m)] = method_seed(cfg.base_seed, r, m);
      entry["method_seeds"] = seeds;
      ledger.push_back(entry);
    }
    echo["seed_ledger"] = ledger;
    detail::OutputFile f(out_dir / "config.json", manifest);
    f.stream() << echo.dump(2) << '\n';
    f.close();
  }
  if (cfg.methods.empty()) return manifest;

  const std::size_t k = cfg.true_theta.size();
  {
    detail::OutputFile f(out_dir / "runs.csv", manifest);
    auto& os = f.stream();
    os << "method,repetition,status,mse,sparsity";
    for (std::size_t i = 0; i < k; ++i) os << ",theta_" << i + 1;
    os << ",dataset_hash,seed,acceptance_rate,min_ess,final_alpha0,mode_fallback\n";
    for (const auto& r : table.rows) {
      os << to_string(r.method) << ',' << r.repetition << ',' << detail::csv_field(r.status) << ','
         << fmt_double(r.mse) << ',' << fmt_double(r.sparsity);
      for (std::size_t i = 0; i < k; ++i) os << ',' << (i < r.theta.size() ? fmt_double(r.theta[i]) : "nan");
      os << ',' << detail::hex64(r.dataset_hash) << ',' << r.seed << ',' << fmt_double(r.acceptance_rate) << ','
         << fmt_double(r.min_ess) << ',' << fmt_double(r.final_alpha0) << ',' << (r.mode_fallback ? 1 : 0) << '\n';
    }
    f.close();
  }
  {
    detail::OutputFile f(out_dir / "timings.csv", manifest);
    f.stream() << "method,repetition,wall_seconds\n";
    for (const auto& r : table.rows) {
      f.stream() << to_string(r.method) << ',' << r.repetition << ',' << fmt_double(r.wall_seconds) << '\n';
    }
    f.close();
  }
  {
    detail::OutputFile f(out_dir / "summary.csv", manifest);
    f.stream() << "method,n_ok,mean_mse,mean_sparsity,median_mse,median_sparsity\n";
    for (const auto& m : summary.methods) {
      f.stream() << to_string(m.method) << ',' << m.n_ok << ',' << fmt_double(m.mean_mse) << ','
                 << fmt_double(m.mean_sparsity) << ',' << fmt_double(m.median_mse) << ','
                 << fmt_double(m.median_sparsity) << '\n';
    }
    f.close();
  }
  if (!summary.mse_pvalues.empty() && !summary.mse_pvalues.cells.empty()) {
    detail::OutputFile a(out_dir / "pvalues_mse.csv", manifest);
    detail::write_pvalues(summary.mse_pvalues, a.stream());
    a.close();
    detail::OutputFile b(out_dir / "pvalues_sparsity.csv", manifest);
    detail::write_pvalues(summary.sparsity_pvalues, b.stream());
    b.close();
  }

  // fitted curves of the first repetition
  const GeneratedData first = generate_dataset(cfg, 0);
  std::vector<std::vector<double>> curves;
  for (Method m : cfg.methods) {
    std::vector<double> y(first.test_inputs.size(), std::numeric_limits<double>::quiet_NaN());
    for (const ResultRow* r : table.rows_for(m)) {
      if (r->repetition != 0 || r->theta.empty()) continue;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = predict(r->theta, first.test_inputs[i]);
    }
    curves.push_back(std::move(y));
  }
  {
    detail::OutputFile f(out_dir / "curves.csv", manifest);
    f.stream() << "x,true_y";
    for (Method m : cfg.methods) f.stream() << ',' << to_string(m);
    f.stream() << '\n';
    for (std::size_t i = 0; i < first.test_inputs.size(); ++i) {
      f.stream() << fmt_double(first.test_inputs[i]) << ',' << fmt_double(first.test_truth[i]);
      for (const auto& c : curves) f.stream() << ',' << fmt_double(c[i]);
      f.stream() << '\n';
    }
    f.close();
  }

  if (svg) {
    {
      detail::Frame fr;
      double lo = 0.0, hi = 0.0;
      for (double v : first.test_truth) lo = std::min(lo, v), hi = std::max(hi, v);
      for (const auto& c : curves) {
        for (double v : c) {
          if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
        }
      }
      fr.y0 = lo;
      fr.y1 = hi > lo ? hi : lo + 1.0;
      detail::OutputFile f(out_dir / "curves.svg", manifest);
      auto& os = f.stream();
      detail::svg_axes(os, fr, "Actual and fitted curves (repetition 0)");
      auto polyline = [&](const std::vector<double>& ys, const char* color, const char* dash) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-dasharray=\"" << dash << "\" points=\"";
        const std::size_t stride = std::max<std::size_t>(1, ys.size() / 200);
        for (std::size_t i = 0; i < ys.size(); i += stride) {
          if (std::isfinite(ys[i])) os << fr.px(first.test_inputs[i]) << ',' << fr.py(ys[i]) << ' ';
        }
        os << "\"/>\n";
      };
      polyline(first.test_truth, detail::palette(0), "6,3,2,3");
      for (std::size_t m = 0; m < curves.size(); ++m) {
        polyline(curves[m], detail::palette(m + 1), is_balson(cfg.methods[m]) ? "none" : "5,4");
        os << "<text x=\"" << fr.left + 10 << "\" y=\"" << fr.top + 14 * (m + 1) << "\" fill=\"" << detail::palette(m + 1)
           << "\">" << to_string(cfg.methods[m]) << "</text>\n";
      }
      os << "</svg>\n";
      f.close();
    }
    for (auto [metric, name, title] : {std::tuple{Metric::kMse, "mse_box.svg", "Distribution of MSE"},
                                       std::tuple{Metric::kSparsity, "sparsity_box.svg", "Distribution of sparsity"}}) {
      std::vector<std::vector<double>> groups;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (Method m : cfg.methods) {
        std::vector<double> v;
        for (const ResultRow* r : table.rows_for(m)) {
          const double x = detail::metric_of(*r, metric);
          if (std::isfinite(x)) v.push_back(x), lo = std::min(lo, x), hi = std::max(hi, x);
        }
        std::sort(v.begin(), v.end());
        groups.push_back(std::move(v));
      }
      if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
      detail::Frame fr;
      fr.y0 = lo;
      fr.y1 = hi > lo ? hi : lo + 1.0;
      detail::OutputFile f(out_dir / name, manifest);
      auto& os = f.stream();
      detail::svg_axes(os, fr, title);
      const double slot = (fr.width - fr.left - fr.right) / static_cast<double>(groups.size());
      auto quantile = [](const std::vector<double>& v, double q) {
        const double pos = q * static_cast<double>(v.size() - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return i + 1 < v.size() ? v[i] * (1 - frac) + v[i + 1] * frac : v[i];
      };
      for (std::size_t g = 0; g < groups.size(); ++g) {
        const double cx = fr.left + slot * (static_cast<double>(g) + 0.5);
        os << "<text x=\"" << cx << "\" y=\"" << fr.height - fr.bottom + 16 << "\" text-anchor=\"middle\">"
           << to_string(cfg.methods[g]) << "</text>\n";
        const auto& v = groups[g];
        if (v.empty()) continue;
        const double q1 = quantile(v, 0.25), q2 = quantile(v, 0.5), q3 = quantile(v, 0.75);
        const double w = slot * 0.3;
        os << "<line x1=\"" << cx << "\" y1=\"" << fr.py(v.front()) << "\" x2=\"" << cx << "\" y2=\""
           << fr.py(v.back()) << "\" stroke=\"black\"/>\n";
        os << "<rect x=\"" << cx - w << "\" y=\"" << fr.py(q3) << "\" width=\"" << 2 * w << "\" height=\""
           << fr.py(q1) - fr.py(q3) << "\" fill=\"" << detail::palette(g + 1) << "\" fill-opacity=\"0.4\" stroke=\"black\"/>\n";
        os << "<line x1=\"" << cx - w << "\" y1=\"" << fr.py(q2) << "\" x2=\"" << cx + w << "\" y2=\"" << fr.py(q2)
           << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
      }
      os << "</svg>\n";
      f.close();
    }
  }
  return manifest;
}

}  // namespace balson
