// debayes: debiased Bayesian inference for sparse linear regression.
//
// Subcommands:
//   analyze    fit an initial sparse posterior on a CSV, debias it, report
//              credible intervals
//   simulate   Monte Carlo coverage/bias/RMSE study over the S1-S6 designs
//   precision  standalone precision-matrix estimation and export
//   weights    Bayesian bootstrap weight diagnostics

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "debayes/debias.hpp"
#include "debayes/errors.hpp"
#include "debayes/horseshoe.hpp"
#include "debayes/kernels.hpp"
#include "debayes/parallel.hpp"
#include "debayes/precision.hpp"
#include "debayes/sim.hpp"
#include "debayes/stats.hpp"
#include "debayes/vb.hpp"

namespace fs = std::filesystem;
using namespace debayes;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void write_manifest(const fs::path& dir, const std::string& subcommand,
                    const std::map<std::string, std::string>& config,
                    const std::map<std::string, double>& timings_ms) {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["config"] = config;
  j["timings_ms"] = timings_ms;
  j["simd_lane"] = kernels::isa_name(kernels::active_isa());
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write manifest.json");
  out << j.dump(2) << '\n';
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct AnalyzeOptions {
  std::string input;
  std::string response;
  std::string prior = "spike_slab_vb";
  std::string precision = "nodewise";
  int b_draws = 8000;
  double level = 0.95;
  std::uint64_t seed = 0;
  bool standardize = false;
  std::string output = "debayes_out";
  bool save_draws = false;
  double slab_lambda = 1.0;
  double u = 1.0;
  double noise_variance = 0.0;  // 0: plug-in from pilot lasso residuals
  int burn_in = 8000;
  double sigma_scale = 10.0;
  double lasso_scale = 2.0;
  std::string lasso_select = "default";
  double nodewise_scale = 1.0;
  double kappa = 0.0;  // 0: plug-in default
  bool clime_symmetrize = false;
  int threads = 0;

  std::map<std::string, std::string> as_config() const {
    return {{"input", input},
            {"response", response},
            {"prior", prior},
            {"precision", precision},
            {"draws", std::to_string(b_draws)},
            {"level", fmt(level)},
            {"seed", std::to_string(seed)},
            {"standardize", standardize ? "true" : "false"},
            {"output", output},
            {"save-draws", save_draws ? "true" : "false"},
            {"slab-lambda", fmt(slab_lambda)},
            {"u", fmt(u)},
            {"noise-variance", fmt(noise_variance)},
            {"burn-in", std::to_string(burn_in)},
            {"sigma-scale", fmt(sigma_scale)},
            {"lasso-scale", fmt(lasso_scale)},
            {"lasso-select", lasso_select},
            {"nodewise-scale", fmt(nodewise_scale)},
            {"kappa", fmt(kappa)},
            {"clime-symmetrize", clime_symmetrize ? "true" : "false"},
            {"threads", std::to_string(threads)}};
  }
};

void add_analyze_options(CLI::App* cmd, AnalyzeOptions& o) {
  cmd->add_option("--input", o.input, "input CSV (header row required)")->required();
  cmd->add_option("--response", o.response, "response column label or 0-based index")
      ->required();
  cmd->add_option("--prior", o.prior, "initial posterior: spike_slab_vb | horseshoe");
  cmd->add_option("--precision", o.precision,
                  "precision estimator: nodewise | clime | direct");
  cmd->add_option("--draws", o.b_draws, "number of posterior draws B");
  cmd->add_option("--level", o.level, "credible level, e.g. 0.95");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_flag("--standardize", o.standardize, "center/scale covariate columns");
  cmd->add_option("--output", o.output, "output directory");
  cmd->add_flag("--save-draws", o.save_draws, "export full draw matrices");
  cmd->add_option("--slab-lambda", o.slab_lambda, "Laplace slab rate");
  cmd->add_option("--u", o.u, "Beta(1, p^u) sparsity exponent");
  cmd->add_option("--noise-variance", o.noise_variance,
                  "fix the noise variance (0 = plug-in estimate)");
  cmd->add_option("--burn-in", o.burn_in, "horseshoe burn-in iterations");
  cmd->add_option("--sigma-scale", o.sigma_scale, "horseshoe top-level scale");
  cmd->add_option("--lasso-scale", o.lasso_scale, "pilot lasso penalty scale");
  cmd->add_option("--lasso-select", o.lasso_select,
                  "pilot penalty selector: default | cv");
  cmd->add_option("--nodewise-scale", o.nodewise_scale, "nodewise penalty scale");
  cmd->add_option("--kappa", o.kappa, "CLIME constraint radius (0 = plug-in)");
  cmd->add_flag("--clime-symmetrize", o.clime_symmetrize, "symmetrize the CLIME rows");
  cmd->add_option("--threads", o.threads, "worker threads (0 = auto)");
  cmd->set_config("--config");
}

PrecisionEstimate estimate_precision(const Dataset& data, const std::string& method,
                                     double nodewise_scale, double kappa,
                                     bool symmetrize, int threads) {
  const int n = static_cast<int>(data.n());
  const int p = static_cast<int>(data.p());
  if (method == "nodewise")
    return nodewise_lasso(data, default_nodewise_penalties(n, p, nodewise_scale),
                          threads);
  if (method == "clime") {
    const double k = kappa > 0.0 ? kappa : default_clime_kappa(data);
    return clime(data, k, symmetrize, threads);
  }
  if (method == "direct" || method == "direct_inverse") return direct_inverse(data);
  throw ConfigError("unknown precision method '" + method +
                    "'; valid names: nodewise clime direct");
}

int run_analyze(const AnalyzeOptions& o) {
  if (o.b_draws < 100)
    throw ConfigError("interval output needs at least 100 draws (got " +
                      std::to_string(o.b_draws) + ")");
  if (!(o.level > 0.0 && o.level < 1.0))
    throw ConfigError("level must lie strictly inside (0,1)");
  if (o.prior != "spike_slab_vb" && o.prior != "horseshoe")
    throw ConfigError("unknown prior '" + o.prior +
                      "'; valid names: spike_slab_vb horseshoe");

  const auto t0 = Clock::now();
  std::map<std::string, double> timings;

  const Dataset data = load_csv(o.input, o.response, o.standardize);
  timings["load"] = elapsed_ms(t0);

  const fs::path out_dir(o.output);
  fs::create_directories(out_dir);

  // pilot lasso: penalty selector + noise plug-in
  const auto t_pilot = Clock::now();
  LassoConfig pilot_cfg;
  if (o.lasso_select == "cv")
    pilot_cfg.penalty = cv_penalty(data, o.seed);
  else if (o.lasso_select == "default")
    pilot_cfg.penalty = data.p() > 1
                            ? default_penalty(static_cast<int>(data.n()),
                                              static_cast<int>(data.p()), o.lasso_scale)
                            : 0.0;
  else
    throw ConfigError("unknown lasso selector '" + o.lasso_select + "'");

  double noise_variance = o.noise_variance;
  if (!(noise_variance > 0.0)) {
    const LassoFit pilot = fit_lasso(data, pilot_cfg);
    const Vector fitted = matvec(data.design(), pilot.coefficients);
    double rss = 0.0;
    std::size_t active = 0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      const double r = data.response()[i] - fitted[i];
      rss += r * r;
    }
    for (double c : pilot.coefficients)
      if (c != 0.0) ++active;
    noise_variance = std::max(
        rss / std::max(static_cast<double>(data.n()) - static_cast<double>(active), 1.0),
        1e-10);
  }
  timings["pilot"] = elapsed_ms(t_pilot);

  const auto t_theta = Clock::now();
  const PrecisionEstimate theta =
      estimate_precision(data, o.precision, o.nodewise_scale, o.kappa,
                         o.clime_symmetrize, o.threads);
  timings["precision"] = elapsed_ms(t_theta);

  const auto t_post = Clock::now();
  PosteriorDrawSet raw;
  if (o.prior == "spike_slab_vb") {
    SpikeSlabPrior prior;
    prior.slab_lambda = o.slab_lambda;
    prior.u = o.u;
    prior.noise_variance = noise_variance;
    const VariationalState state = fit_vb(data, prior);
    export_state_json(state, (out_dir / "vb_state.json").string());
    raw = sample_vb(state, o.b_draws, o.seed, o.threads);
  } else {
    HorseshoeConfig hs;
    hs.n_draws = o.b_draws;
    hs.burn_in = o.burn_in;
    hs.seed = o.seed;
    hs.sigma_scale = o.sigma_scale;
    raw = sample_horseshoe(data, hs);
  }
  timings["posterior"] = elapsed_ms(t_post);

  const auto t_debias = Clock::now();
  const DebiasedDrawSet debiased = run_algorithm1(data, raw, theta, o.seed, o.threads);
  timings["debias"] = elapsed_ms(t_debias);

  // interval table, raw and debiased side by side, on the original scale
  const double alpha = 1.0 - o.level;
  const std::size_t p = data.p();
  Vector rescale(p, 1.0);
  if (data.standardization())
    for (std::size_t j = 0; j < p; ++j) rescale[j] = 1.0 / data.standardization()->scale[j];

  std::ofstream table(out_dir / "intervals.csv");
  if (!table) throw DataError("cannot write intervals.csv");
  table << "index,name,raw_mean,raw_lower,raw_upper,debiased_mean,debiased_lower,"
           "debiased_upper,level\n";
  table.precision(12);
  for (std::size_t j = 0; j < p; ++j) {
    const CredibleInterval raw_ci = credible_interval(raw.draws, j, alpha);
    const CredibleInterval deb_ci = credible_interval(debiased, j, alpha);
    double raw_mean = 0.0, deb_mean = 0.0;
    for (std::size_t b = 0; b < raw.draws.rows(); ++b) raw_mean += raw.draws(b, j);
    for (std::size_t b = 0; b < debiased.draws.rows(); ++b) deb_mean += debiased.draws(b, j);
    raw_mean /= static_cast<double>(raw.draws.rows());
    deb_mean /= static_cast<double>(debiased.draws.rows());
    const std::string name =
        data.column_names().empty() ? "x" + std::to_string(j + 1) : data.column_names()[j];
    const double s = rescale[j];
    table << j << ',' << name << ',' << raw_mean * s << ',' << raw_ci.lower * s << ','
          << raw_ci.upper * s << ',' << deb_mean * s << ',' << deb_ci.lower * s << ','
          << deb_ci.upper * s << ',' << o.level << '\n';
  }
  table.close();

  if (o.save_draws) {
    export_draws_csv(raw.draws, (out_dir / "draws_raw.csv").string());
    export_draws_csv(debiased.draws, (out_dir / "draws_debiased.csv").string());
  }
  if (o.standardize)
    export_standardization_json(data, (out_dir / "standardization.json").string());
  export_precision_diagnostics_json(theta,
                                    (out_dir / "precision_diagnostics.json").string());

  timings["total"] = elapsed_ms(t0);
  write_manifest(out_dir, "analyze", o.as_config(), timings);

  std::cout << "analyze: n=" << data.n() << " p=" << p << " B=" << o.b_draws
            << " prior=" << o.prior << " precision=" << o.precision << '\n'
            << "wrote " << (out_dir / "intervals.csv").string() << '\n';
  return 0;
}

struct SimulateOptions {
  std::string scenario = "S1";
  int n = 100;
  int p = 50;
  int reps = 200;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::string methods = "bayes,debiased_bayes,debiased_lasso";
  int parallelism = 0;
  int b_draws = 8000;
  std::string prior = "spike_slab_vb";
  int burn_in = 8000;
  double slab_lambda = 1.0;
  double u = 1.0;
  double lasso_scale = 2.0;
  double nodewise_scale = 1.0;
  std::string format = "csv";
  std::string output = "debayes_sim";

  std::map<std::string, std::string> as_config() const {
    return {{"scenario", scenario},
            {"n", std::to_string(n)},
            {"p", std::to_string(p)},
            {"reps", std::to_string(reps)},
            {"level", fmt(level)},
            {"seed", std::to_string(seed)},
            {"methods", methods},
            {"parallelism", std::to_string(parallelism)},
            {"draws", std::to_string(b_draws)},
            {"prior", prior},
            {"burn-in", std::to_string(burn_in)},
            {"slab-lambda", fmt(slab_lambda)},
            {"u", fmt(u)},
            {"lasso-scale", fmt(lasso_scale)},
            {"nodewise-scale", fmt(nodewise_scale)},
            {"format", format},
            {"output", output}};
  }
};

void add_simulate_options(CLI::App* cmd, SimulateOptions& o) {
  cmd->add_option("--scenario", o.scenario, "S1..S6")->required();
  cmd->add_option("--n", o.n, "observations per replication");
  cmd->add_option("--p", o.p, "covariate dimension");
  cmd->add_option("--reps", o.reps, "number of replications");
  cmd->add_option("--level", o.level, "interval level");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--methods", o.methods, "comma-separated method list");
  cmd->add_option("--parallelism", o.parallelism, "worker threads (0 = auto)");
  cmd->add_option("--draws", o.b_draws, "posterior draws per replication");
  cmd->add_option("--prior", o.prior, "spike_slab_vb | horseshoe");
  cmd->add_option("--burn-in", o.burn_in, "horseshoe burn-in");
  cmd->add_option("--slab-lambda", o.slab_lambda, "Laplace slab rate");
  cmd->add_option("--u", o.u, "Beta(1, p^u) sparsity exponent");
  cmd->add_option("--lasso-scale", o.lasso_scale, "pilot lasso penalty scale");
  cmd->add_option("--nodewise-scale", o.nodewise_scale, "nodewise penalty scale");
  cmd->add_option("--format", o.format, "report format: csv | json | plotdata");
  cmd->add_option("--output", o.output, "output directory");
  cmd->set_config("--config");
}

int run_simulate(const SimulateOptions& o) {
  const auto t0 = Clock::now();
  const SimulationScenario scn =
      SimulationScenario::make(scenario_from_name(o.scenario), o.n, o.p);

  StudyConfig cfg;
  cfg.replications = o.reps;
  cfg.level = o.level;
  cfg.seed = o.seed;
  cfg.parallelism = o.parallelism;
  cfg.b_draws = o.b_draws;
  cfg.slab_lambda = o.slab_lambda;
  cfg.u = o.u;
  cfg.lasso_scale = o.lasso_scale;
  cfg.nodewise_scale = o.nodewise_scale;
  if (o.prior == "horseshoe") {
    cfg.horseshoe_prior = true;
    cfg.horseshoe_burn_in = o.burn_in;
  } else if (o.prior != "spike_slab_vb") {
    throw ConfigError("unknown prior '" + o.prior +
                      "'; valid names: spike_slab_vb horseshoe");
  }
  cfg.methods.clear();
  std::stringstream ss(o.methods);
  std::string item;
  while (std::getline(ss, item, ',')) cfg.methods.insert(method_from_name(item));

  ReportFormat format;
  if (o.format == "csv") format = ReportFormat::csv;
  else if (o.format == "json") format = ReportFormat::json;
  else if (o.format == "plotdata") format = ReportFormat::plotdata;
  else throw ConfigError("unknown format '" + o.format + "'; valid: csv json plotdata");

  const std::vector<MetricsTable> tables = run_study(scn, cfg);

  const fs::path out_dir(o.output);
  fs::create_directories(out_dir);
  const char* ext = format == ReportFormat::csv
                        ? "report.csv"
                        : (format == ReportFormat::json ? "report.json" : "report.txt");
  emit_report(tables, format, (out_dir / ext).string());

  std::map<std::string, double> timings;
  timings["total"] = elapsed_ms(t0);
  write_manifest(out_dir, "simulate", o.as_config(), timings);

  // summary to stdout
  std::printf("%-16s %-6s %10s %10s %10s\n", "method", "group", "coverage", "bias",
              "rmse");
  for (const auto& t : tables)
    for (const auto& [g, gm] : t.per_group)
      std::printf("%-16s %-6d %10.4f %10.4f %10.4f\n", method_name(t.method), g,
                  gm.coverage, gm.bias, gm.rmse);
  std::cout << "wrote " << (out_dir / ext).string() << '\n';
  return 0;
}

struct PrecisionOptions {
  std::string input;
  std::string response;  // optional; dropped from the design if given
  std::string method = "nodewise";
  double nodewise_scale = 1.0;
  double kappa = 0.0;
  bool clime_symmetrize = false;
  int threads = 0;
  std::string output = "debayes_precision";

  std::map<std::string, std::string> as_config() const {
    return {{"input", input},
            {"response", response},
            {"method", method},
            {"nodewise-scale", fmt(nodewise_scale)},
            {"kappa", fmt(kappa)},
            {"clime-symmetrize", clime_symmetrize ? "true" : "false"},
            {"threads", std::to_string(threads)},
            {"output", output}};
  }
};

int run_precision(const PrecisionOptions& o) {
  const auto t0 = Clock::now();
  Dataset data = [&] {
    if (!o.response.empty()) return load_csv(o.input, o.response, false);
    // no response column: treat every column as a covariate
    Dataset with_first = load_csv(o.input, "0", false);
    const std::size_t n = with_first.n();
    Matrix full(n, with_first.p() + 1);
    for (std::size_t i = 0; i < n; ++i) {
      full(i, 0) = with_first.response()[i];
      for (std::size_t j = 0; j < with_first.p(); ++j)
        full(i, j + 1) = with_first.design()(i, j);
    }
    return Dataset(std::move(full), Vector(n, 0.0));
  }();

  const PrecisionEstimate est = estimate_precision(
      data, o.method, o.nodewise_scale, o.kappa, o.clime_symmetrize, o.threads);

  const fs::path out_dir(o.output);
  fs::create_directories(out_dir);
  export_precision_csv(est, (out_dir / "theta.csv").string());
  export_precision_diagnostics_json(est, (out_dir / "diagnostics.json").string());

  std::map<std::string, double> timings;
  timings["total"] = elapsed_ms(t0);
  write_manifest(out_dir, "precision", o.as_config(), timings);
  std::cout << "method=" << precision_method_name(est.method)
            << " constraint_norm=" << est.constraint_norm << '\n'
            << "wrote " << (out_dir / "theta.csv").string() << '\n';
  return 0;
}

struct WeightsOptions {
  int n = 0;
  int b_draws = 8000;
  std::uint64_t seed = 0;
  bool save = false;
  std::string output = "debayes_weights";

  std::map<std::string, std::string> as_config() const {
    return {{"n", std::to_string(n)},
            {"draws", std::to_string(b_draws)},
            {"seed", std::to_string(seed)},
            {"save", save ? "true" : "false"},
            {"output", output}};
  }
};

int run_weights(const WeightsOptions& o) {
  if (o.n < 1) throw ConfigError("weights: --n must be >= 1");
  if (o.b_draws < 1) throw ConfigError("weights: --draws must be >= 1");
  const auto t0 = Clock::now();
  const auto ws = draw_weights(o.n, o.b_draws, o.seed);

  double min_w = 1.0, max_sum_err = 0.0;
  std::vector<double> first_coord;
  first_coord.reserve(ws.size());
  for (const auto& w : ws) {
    double s = 0.0;
    for (double v : w.weights) {
      s += v;
      min_w = std::min(min_w, v);
    }
    max_sum_err = std::max(max_sum_err, std::fabs(s - 1.0));
    first_coord.push_back(w.weights[0]);
  }
  // W_1 is marginally Beta(1, n-1): F(x) = 1 - (1-x)^{n-1}
  const double nm1 = static_cast<double>(o.n - 1);
  const double ks = stats::ks_statistic(first_coord, [nm1](double x) {
    return x >= 1.0 ? 1.0 : (x <= 0.0 ? 0.0 : 1.0 - std::pow(1.0 - x, nm1));
  });
  const double crit = stats::ks_critical_value(first_coord.size(), 0.01);

  const fs::path out_dir(o.output);
  fs::create_directories(out_dir);
  nlohmann::json j;
  j["n"] = o.n;
  j["draws"] = o.b_draws;
  j["min_weight"] = min_w;
  j["max_sum_error"] = max_sum_err;
  j["ks_statistic_vs_beta_1_nm1"] = ks;
  j["ks_critical_1pct"] = crit;
  j["ks_pass_1pct"] = ks < crit;
  std::ofstream out(out_dir / "diagnostics.json");
  out << j.dump(2) << '\n';
  if (o.save) {
    Matrix m(ws.size(), o.n);
    for (std::size_t b = 0; b < ws.size(); ++b)
      std::copy(ws[b].weights.begin(), ws[b].weights.end(), m.row(b));
    export_draws_csv(m, (out_dir / "weights.csv").string());
  }
  std::map<std::string, double> timings;
  timings["total"] = elapsed_ms(t0);
  write_manifest(out_dir, "weights", o.as_config(), timings);
  std::cout << "ks=" << ks << " crit(1%)=" << crit << " pass=" << (ks < crit)
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"debiased Bayesian inference for sparse linear regression"};
  app.require_subcommand(1);

  AnalyzeOptions ao;
  SimulateOptions so;
  PrecisionOptions po;
  WeightsOptions wo;

  CLI::App* analyze = app.add_subcommand("analyze", "debias a posterior on CSV data");
  add_analyze_options(analyze, ao);

  CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo study");
  add_simulate_options(simulate, so);

  CLI::App* precision = app.add_subcommand("precision", "estimate the precision matrix");
  precision->add_option("--input", po.input, "input CSV")->required();
  precision->add_option("--response", po.response,
                        "response column to drop (all columns used if omitted)");
  precision->add_option("--method", po.method, "nodewise | clime | direct");
  precision->add_option("--nodewise-scale", po.nodewise_scale, "nodewise penalty scale");
  precision->add_option("--kappa", po.kappa, "CLIME radius (0 = plug-in)");
  precision->add_flag("--clime-symmetrize", po.clime_symmetrize, "symmetrize CLIME rows");
  precision->add_option("--threads", po.threads, "worker threads (0 = auto)");
  precision->add_option("--output", po.output, "output directory");
  precision->set_config("--config");

  CLI::App* weights = app.add_subcommand("weights", "weight diagnostics");
  weights->add_option("--n", wo.n, "sample size")->required();
  weights->add_option("--draws", wo.b_draws, "number of weight vectors");
  weights->add_option("--seed", wo.seed, "RNG seed");
  weights->add_flag("--save", wo.save, "export the weight matrix");
  weights->add_option("--output", wo.output, "output directory");
  weights->set_config("--config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (analyze->parsed()) return run_analyze(ao);
    if (simulate->parsed()) return run_simulate(so);
    if (precision->parsed()) return run_precision(po);
    if (weights->parsed()) return run_weights(wo);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
