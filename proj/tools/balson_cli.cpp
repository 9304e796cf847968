// balson: command-line front end.
//
//   balson fit          fit a nonnegative L1-constrained polynomial to x,y CSV data
//   balson bench        run the multi-method polynomial-fitting experiment
//   balson sample-diag  moment diagnostics for Dirichlet prior sampling
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "balson/balson.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

int exit_code_for(balson::ErrorKind kind) {
  switch (kind) {
    case balson::ErrorKind::kInvalidArgument:
    case balson::ErrorKind::kDimensionMismatch: return kExitUsage;
    case balson::ErrorKind::kIo: return kExitIo;
    default: return kExitNumerical;
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    balson::fail(balson::ErrorKind::kInvalidArgument, "cannot parse number '" + text + "' in " + where);
  }
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item), "--prior"));
  return out;
}

balson::Dataset read_xy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) balson::fail(balson::ErrorKind::kIo, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) balson::fail(balson::ErrorKind::kInvalidArgument, path + ": empty file");
  std::string header;
  for (char c : line) {
    if (!std::isspace(static_cast<unsigned char>(c))) header += c;
  }
  if (header != "x,y") balson::fail(balson::ErrorKind::kInvalidArgument, path + ": header must be 'x,y'");
  std::vector<double> xs, ys;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    const std::string where = path + ":" + std::to_string(lineno);
    if (comma == std::string::npos) balson::fail(balson::ErrorKind::kInvalidArgument, where + ": expected x,y");
    xs.push_back(parse_number(trim(line.substr(0, comma)), where));
    ys.push_back(parse_number(trim(line.substr(comma + 1)), where));
  }
  if (in.bad()) balson::fail(balson::ErrorKind::kIo, "error reading " + path);
  return balson::Dataset(std::move(xs), std::move(ys));
}

nlohmann::json report_json(const balson::FitReport& r, const balson::BalsonConfig& cfg, const std::string& input) {
  using nlohmann::json;
  json rounds = json::array();
  for (const auto& d : r.diagnostics.rounds) {
    rounds.push_back({{"round", d.round},
                      {"sampler", d.rejection ? "RS" : "IS"},
                      {"ess", d.ess},
                      {"acceptance_rate", d.acceptance_rate},
                      {"proposals", d.proposals},
                      {"alpha0", d.alpha0}});
  }
  json j;
  j["theta_star"] = std::vector<double>(r.theta_star.values().begin(), r.theta_star.values().end());
  j["alpha_star"] = std::vector<double>(r.alpha_star.alpha().begin(), r.alpha_star.alpha().end());
  j["omega_star"] = std::vector<double>(r.omega_star.values().begin(), r.omega_star.values().end());
  j["diagnostics"] = {{"method", r.diagnostics.method},
                      {"uniform_prior", r.diagnostics.uniform_prior},
                      {"prior_alpha", r.diagnostics.prior_alpha},
                      {"rounds", rounds},
                      {"alpha0_trajectory", r.diagnostics.alpha0_trajectory},
                      {"mode_fallback", r.diagnostics.mode_fallback},
                      {"wall_seconds", r.diagnostics.wall_seconds}};
  j["config"] = {{"input", input},
                 {"order", cfg.spec.order},
                 {"budget", cfg.spec.budget},
                 {"method", balson::to_string(cfg.method)},
                 {"samples", cfg.sampler.sample_count},
                 {"rounds", cfg.sampler.resample_rounds},
                 {"max_proposals", cfg.sampler.proposal_cap()},
                 {"prior", cfg.prior ? json(std::vector<double>(cfg.prior->alpha().begin(), cfg.prior->alpha().end()))
                                     : json("uniform")}};
  j["seed"] = cfg.sampler.seed;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) balson::fail(balson::ErrorKind::kIo, "cannot open " + path + " for writing");
  out << text;
  out.close();
  if (!out) balson::fail(balson::ErrorKind::kIo, "failed writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian least squares under a nonnegative L1-norm constraint"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a polynomial to x,y CSV data");
  std::string input, output, method_name = "rsirs", prior_text = "uniform";
  int order = 5;
  double budget = 1.0;
  long long samples = 10000, rounds = 5, max_proposals = 0;
  std::uint64_t seed = 0;
  fit->add_option("--input", input, "CSV file with header x,y")->required();
  fit->add_option("--order", order, "Number of polynomial coefficients K")->check(CLI::Range(2, 64));
  fit->add_option("--budget", budget, "L1 budget C");
  fit->add_option("--method", method_name, "rs | is | rsirs | isirs");
  fit->add_option("--samples", samples, "Samples per pass L");
  fit->add_option("--rounds", rounds, "Importance-resampling rounds R");
  fit->add_option("--max-proposals", max_proposals, "Rejection-sampling proposal cap (0: 1000 * L)");
  fit->add_option("--seed", seed, "Random seed");
  fit->add_option("--prior", prior_text, "Comma-separated Dirichlet prior or 'uniform'");
  fit->add_option("--output", output, "Output JSON path (stdout when omitted)");

  // bench
  auto* bench = app.add_subcommand("bench", "Run the polynomial-fitting experiment");
  std::string config_path, out_dir;
  bool svg = false;
  int threads = 0;
  bench->add_option("--config", config_path, "Experiment config JSON")->required();
  bench->add_option("--out-dir", out_dir, "Output directory (overrides output_dir in the config)");
  bench->add_flag("--svg", svg, "Also write SVG charts");
  bench->add_option("--threads", threads, "Worker threads for repetitions (overrides the config)");

  // sample-diag
  auto* diag = app.add_subcommand("sample-diag", "Moment diagnostics for prior sampling");
  int diag_order = 0;
  std::string diag_prior;
  long long diag_samples = 100000;
  std::uint64_t diag_seed = 0;
  diag->add_option("--order", diag_order, "Dimension K")->required();
  diag->add_option("--prior", diag_prior, "Comma-separated Dirichlet parameters or 'uniform'")->required();
  diag->add_option("--samples", diag_samples, "Number of draws");
  diag->add_option("--seed", diag_seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fit) {
      balson::BalsonConfig cfg;
      auto m = balson::parse_sampling_method(method_name);
      if (!m) balson::fail(balson::ErrorKind::kInvalidArgument, "unknown method '" + method_name + "'");
      cfg.method = *m;
      cfg.spec = {order, budget};
      cfg.spec.validate();
      cfg.sampler.sample_count = samples;
      cfg.sampler.resample_rounds = rounds;
      cfg.sampler.max_proposals = max_proposals;
      cfg.sampler.seed = seed;
      if (trim(prior_text) != "uniform") cfg.prior = balson::DirichletParams(parse_list(prior_text));
      const balson::Dataset data = read_xy_csv(input);
      const balson::FitReport report = balson::solve(data, cfg);
      const std::string text = report_json(report, cfg, input).dump(2) + "\n";
      if (output.empty()) {
        std::cout << text;
      } else {
        write_text(output, text);
      }
    } else if (*bench) {
      std::ifstream in(config_path);
      if (!in) balson::fail(balson::ErrorKind::kIo, "cannot open " + config_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        balson::fail(balson::ErrorKind::kInvalidArgument, config_path + ": " + e.what());
      }
      balson::ExperimentConfig cfg = balson::experiment_config_from_json(j);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (threads > 0) cfg.threads = threads;
      const balson::ResultTable table = balson::run_experiment(cfg);
      const balson::Summary summary = balson::summarize(table);
      const auto manifest = balson::emit_outputs(table, summary, cfg.output_dir, svg);
      std::printf("%-14s %6s %12s %12s\n", "method", "n_ok", "mean_mse", "mean_sparsity");
      for (const auto& s : summary.methods) {
        std::printf("%-14s %6d %12.6g %12.6g\n", balson::to_string(s.method), s.n_ok, s.mean_mse, s.mean_sparsity);
      }
      for (const auto& p : manifest) std::printf("wrote %s\n", p.string().c_str());
    } else if (*diag) {
      const balson::DirichletParams params = trim(diag_prior) == "uniform"
                                                 ? balson::DirichletParams::uniform(static_cast<std::size_t>(diag_order))
                                                 : balson::DirichletParams(parse_list(diag_prior));
      if (params.size() != static_cast<std::size_t>(diag_order)) {
        balson::fail(balson::ErrorKind::kDimensionMismatch, "--prior has " + std::to_string(params.size()) +
                                                                 " entries but --order is " + std::to_string(diag_order));
      }
      if (diag_samples < 2) balson::fail(balson::ErrorKind::kInvalidArgument, "--samples must be >= 2");
      balson::RandomStream rng(diag_seed);
      const std::size_t k = params.size();
      std::vector<double> sum(k, 0.0), sum_sq(k, 0.0);
      for (long long l = 0; l < diag_samples; ++l) {
        const balson::SimplexVector w = balson::sample(params, rng);
        for (std::size_t i = 0; i < k; ++i) {
          sum[i] += w[i];
          sum_sq[i] += w[i] * w[i];
        }
      }
      const balson::Moments analytic = balson::moments(params);
      balson::Moments empirical;
      const double n = static_cast<double>(diag_samples);
      for (std::size_t i = 0; i < k; ++i) {
        const double mean = sum[i] / n;
        empirical.mean.push_back(mean);
        empirical.variance.push_back(std::max(0.0, sum_sq[i] / n - mean * mean));
      }
      const balson::DirichletParams matched = balson::match_moments(empirical);
      std::printf("samples %lld  seed %llu  alpha0 %.6g\n", diag_samples, static_cast<unsigned long long>(diag_seed),
                  params.concentration());
      std::printf("%4s %12s %12s %12s %12s %12s %12s\n", "i", "alpha", "mean", "mean_emp", "var", "var_emp",
                  "alpha_match");
      for (std::size_t i = 0; i < k; ++i) {
        std::printf("%4zu %12.6g %12.6g %12.6g %12.6g %12.6g %12.6g\n", i + 1, params[i], analytic.mean[i],
                    empirical.mean[i], analytic.variance[i], empirical.variance[i], matched[i]);
      }
    }
  } catch (const balson::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
