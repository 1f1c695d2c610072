#include "debayes/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>

#include "debayes/debias.hpp"
#include "debayes/errors.hpp"
#include "debayes/horseshoe.hpp"
#include "debayes/linalg.hpp"
#include "debayes/parallel.hpp"
#include "debayes/rng.hpp"
#include "debayes/stats.hpp"
#include "debayes/vb.hpp"

#include "json.hpp"

namespace debayes {

ScenarioId scenario_from_name(const std::string& name) {
  if (name == "S1") return ScenarioId::S1;
  if (name == "S2") return ScenarioId::S2;
  if (name == "S3") return ScenarioId::S3;
  if (name == "S4") return ScenarioId::S4;
  if (name == "S5") return ScenarioId::S5;
  if (name == "S6") return ScenarioId::S6;
  throw ConfigError("unknown scenario '" + name + "'; valid names: S1 S2 S3 S4 S5 S6");
}

const char* scenario_name(ScenarioId id) {
  switch (id) {
    case ScenarioId::S1: return "S1";
    case ScenarioId::S2: return "S2";
    case ScenarioId::S3: return "S3";
    case ScenarioId::S4: return "S4";
    case ScenarioId::S5: return "S5";
    case ScenarioId::S6: return "S6";
  }
  return "?";
}

const char* method_name(Method m) {
  switch (m) {
    case Method::bayes: return "bayes";
    case Method::debiased_bayes: return "debiased_bayes";
    case Method::debiased_lasso: return "debiased_lasso";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "bayes") return Method::bayes;
  if (name == "debiased_bayes") return Method::debiased_bayes;
  if (name == "debiased_lasso") return Method::debiased_lasso;
  throw ConfigError("unknown method '" + name +
                    "'; valid names: bayes debiased_bayes debiased_lasso");
}

SimulationScenario SimulationScenario::make(ScenarioId id, int n, int p) {
  if (n < 2 || p < 1) throw ConfigError("scenario needs n >= 2 and p >= 1");
  SimulationScenario scn;
  scn.id = id;
  scn.n = n;
  scn.p = p;
  static const double signal[5] = {0.25, 0.5, 0.75, 1.0, 2.0};
  scn.beta0.assign(p, 0.0);
  for (int j = 0; j < std::min(p, 5); ++j) scn.beta0[j] = signal[j];
  switch (id) {
    case ScenarioId::S1:
    case ScenarioId::S2:
    case ScenarioId::S3:
      scn.precision_truth = PrecisionTruth::diagonal_1_to_p;
      break;
    default:
      scn.precision_truth = PrecisionTruth::banded_half;
  }
  switch (id) {
    case ScenarioId::S1:
    case ScenarioId::S4:
      scn.error_model = ErrorModel::gauss_unit;
      break;
    case ScenarioId::S2:
    case ScenarioId::S5:
      scn.error_model = ErrorModel::chi2_centered;
      break;
    default:
      scn.error_model = ErrorModel::hetero_abs_x1;
  }
  return scn;
}

Dataset generate(const SimulationScenario& scn, std::uint64_t seed,
                 std::uint32_t replication) {
  const std::size_t n = scn.n;
  const std::size_t p = scn.p;
  rng::Stream xs(seed, rng::stream_id(rng::Domain::sim_design, replication));
  rng::Stream es(seed, rng::stream_id(rng::Domain::sim_noise, replication));

  Matrix x(n, p);
  if (scn.precision_truth == PrecisionTruth::diagonal_1_to_p) {
    for (std::size_t i = 0; i < n; ++i) {
      double* row = x.row(i);
      for (std::size_t j = 0; j < p; ++j)
        row[j] = xs.next_normal() / std::sqrt(static_cast<double>(j + 1));
    }
  } else {
    // Theta0 tridiagonal (0.5, 1, 0.5): X_i = L^{-T} z with Theta0 = L L'
    Matrix theta0(p, p);
    for (std::size_t j = 0; j < p; ++j) {
      theta0(j, j) = 1.0;
      if (j + 1 < p) {
        theta0(j, j + 1) = 0.5;
        theta0(j + 1, j) = 0.5;
      }
    }
    const auto l = linalg::cholesky(theta0);
    if (!l) throw NumericalError("banded precision truth is not positive definite");
    Vector z(p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) z[j] = xs.next_normal();
      const Vector xi = linalg::solve_lower_transposed(*l, z);
      std::copy(xi.begin(), xi.end(), x.row(i));
    }
  }

  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eps = 0.0;
    switch (scn.error_model) {
      case ErrorModel::gauss_unit:
        eps = es.next_normal();
        break;
      case ErrorModel::chi2_centered:
        eps = es.next_chi_squared(3) - 3.0;
        break;
      case ErrorModel::hetero_abs_x1:
        eps = (1.0 + std::fabs(x(i, 0))) * es.next_normal();
        break;
    }
    y[i] = kernels::dot(x.row(i), scn.beta0.data(), p) + eps;
  }

  return Dataset(std::move(x), std::move(y));
}

namespace {

struct RepResult {
  bool ok = false;
  // per method: hit flag and signed error per coefficient
  std::map<Method, std::vector<char>> hits;
  std::map<Method, Vector> errors;
};

MetricsTable aggregate(Method method, const std::vector<RepResult>& reps,
                       const Vector& beta0, double level, int used) {
  const std::size_t p = beta0.size();
  Vector hit_sum(p, 0.0), err_sum(p, 0.0), sq_sum(p, 0.0);
  for (const auto& r : reps) {
    if (!r.ok) continue;
    const auto& h = r.hits.at(method);
    const auto& e = r.errors.at(method);
    for (std::size_t j = 0; j < p; ++j) {
      hit_sum[j] += h[j];
      err_sum[j] += e[j];
      sq_sum[j] += e[j] * e[j];
    }
  }
  const double r = static_cast<double>(used);

  MetricsTable table;
  table.method = method;
  table.replications = used;
  table.level = level;
  // group 0: all true zeros; groups 1..: nonzeros in ascending beta0 order
  std::vector<std::vector<std::size_t>> members(1);
  for (std::size_t j = 0; j < p; ++j)
    if (beta0[j] == 0.0) members[0].push_back(j);
  std::vector<std::pair<double, std::size_t>> nonzero;
  for (std::size_t j = 0; j < p; ++j)
    if (beta0[j] != 0.0) nonzero.emplace_back(beta0[j], j);
  std::sort(nonzero.begin(), nonzero.end());
  for (const auto& [value, j] : nonzero) members.push_back({j});

  for (std::size_t g = 0; g < members.size(); ++g) {
    if (members[g].empty()) continue;
    GroupMetrics gm;
    double bias_acc = 0.0, sq_acc = 0.0, hit_acc = 0.0;
    for (std::size_t j : members[g]) {
      hit_acc += hit_sum[j] / r;
      bias_acc += std::fabs(err_sum[j] / r);
      sq_acc += sq_sum[j] / r;
    }
    const double sz = static_cast<double>(members[g].size());
    gm.coverage = hit_acc / sz;
    gm.bias = bias_acc / sz;
    gm.rmse = std::sqrt(sq_acc / sz);
    table.per_group[static_cast<int>(g)] = gm;
  }
  return table;
}

}  // namespace

std::vector<MetricsTable> run_study(const SimulationScenario& scn,
                                    const StudyConfig& cfg) {
  if (cfg.replications < 1) throw ConfigError("run_study: replications must be >= 1");
  if (!(cfg.level > 0.0 && cfg.level < 1.0))
    throw ConfigError("run_study: level must lie in (0,1)");
  if (cfg.methods.empty()) throw ConfigError("run_study: no methods selected");
  if (cfg.b_draws < 2) throw ConfigError("run_study: need at least 2 posterior draws");

  const std::size_t p = scn.beta0.size();
  const double alpha = 1.0 - cfg.level;
  const double z_crit = stats::normal_quantile(1.0 - alpha / 2.0);
  const bool needs_bayes = cfg.methods.count(Method::bayes) > 0;
  const bool needs_debias = cfg.methods.count(Method::debiased_bayes) > 0;
  const bool needs_dlasso = cfg.methods.count(Method::debiased_lasso) > 0;

  std::vector<RepResult> results(cfg.replications);
  std::atomic<int> failures{0};
  std::mutex log_mutex;

  parallel_for(static_cast<std::size_t>(cfg.replications), [&](std::size_t rep) {
    RepResult& res = results[rep];
    try {
      const Dataset data = generate(scn, cfg.seed, static_cast<std::uint32_t>(rep));
      const std::uint64_t rep_seed = rng::mix64(cfg.seed, rep);
      const int n = static_cast<int>(data.n());

      // shared pilot pieces, computed only where an arm consumes them
      LassoConfig pilot_cfg;
      pilot_cfg.penalty = p > 1 ? default_penalty(n, static_cast<int>(p), cfg.lasso_scale) : 0.0;
      const bool needs_pilot =
          needs_dlasso || ((needs_bayes || needs_debias) && !cfg.horseshoe_prior);
      const LassoFit pilot = needs_pilot ? fit_lasso(data, pilot_cfg) : LassoFit{};
      PrecisionEstimate theta;
      if (needs_debias || needs_dlasso)
        theta = nodewise_lasso(
            data, default_nodewise_penalties(n, static_cast<int>(p), cfg.nodewise_scale), 1);

      auto record = [&](Method m, const Vector& lower, const Vector& upper,
                        const Vector& point) {
        auto& h = res.hits[m];
        auto& e = res.errors[m];
        h.resize(p);
        e.resize(p);
        for (std::size_t j = 0; j < p; ++j) {
          h[j] = lower[j] <= scn.beta0[j] && scn.beta0[j] <= upper[j] ? 1 : 0;
          e[j] = point[j] - scn.beta0[j];
        }
      };

      if (needs_bayes || needs_debias) {
        PosteriorDrawSet raw;
        if (cfg.horseshoe_prior) {
          HorseshoeConfig hs;
          hs.n_draws = cfg.b_draws;
          hs.burn_in = cfg.horseshoe_burn_in;
          hs.seed = rep_seed;
          raw = sample_horseshoe(data, hs);
        } else {
          SpikeSlabPrior prior;
          prior.slab_lambda = cfg.slab_lambda;
          prior.u = cfg.u;
          {
            // plug-in noise variance from the pilot residuals
            const Vector fitted = matvec(data.design(), pilot.coefficients);
            double rss = 0.0;
            std::size_t active = 0;
            for (std::size_t i = 0; i < data.n(); ++i) {
              const double r = data.response()[i] - fitted[i];
              rss += r * r;
            }
            for (double c : pilot.coefficients)
              if (c != 0.0) ++active;
            const double dof = std::max(
                static_cast<double>(data.n()) - static_cast<double>(active), 1.0);
            prior.noise_variance = std::max(rss / dof, 1e-10);
          }
          const VariationalState state = fit_vb(data, prior);
          raw = sample_vb(state, cfg.b_draws, rep_seed, 1);
        }

        if (needs_bayes) {
          Vector lo(p), hi(p), pt(p);
          for (std::size_t j = 0; j < p; ++j) {
            const CredibleInterval ci = credible_interval(raw.draws, j, alpha);
            lo[j] = ci.lower;
            hi[j] = ci.upper;
            double s = 0.0;
            for (std::size_t b = 0; b < raw.draws.rows(); ++b) s += raw.draws(b, j);
            pt[j] = s / static_cast<double>(raw.draws.rows());
          }
          record(Method::bayes, lo, hi, pt);
        }
        if (needs_debias) {
          const DebiasedDrawSet deb = run_algorithm1(data, raw, theta, rep_seed, 1);
          Vector lo(p), hi(p), pt(p);
          for (std::size_t j = 0; j < p; ++j) {
            const CredibleInterval ci = credible_interval(deb.draws, j, alpha);
            lo[j] = ci.lower;
            hi[j] = ci.upper;
            double s = 0.0;
            for (std::size_t b = 0; b < deb.draws.rows(); ++b) s += deb.draws(b, j);
            pt[j] = s / static_cast<double>(deb.draws.rows());
          }
          record(Method::debiased_bayes, lo, hi, pt);
        }
      }

      if (needs_dlasso) {
        const Vector point = debiased_lasso(data, theta, pilot_cfg);
        const Vector sw = estimate_sandwich_variance(data, theta, pilot.coefficients);
        Vector lo(p), hi(p);
        for (std::size_t j = 0; j < p; ++j) {
          const double half = z_crit * std::sqrt(sw[j] / static_cast<double>(n));
          lo[j] = point[j] - half;
          hi[j] = point[j] + half;
        }
        record(Method::debiased_lasso, lo, hi, point);
      }

      res.ok = true;
    } catch (const std::exception& e) {
      failures.fetch_add(1);
      std::lock_guard<std::mutex> lock(log_mutex);
      std::fprintf(stderr, "replication %zu failed: %s\n", rep, e.what());
    }
  }, cfg.parallelism);

  const int failed = failures.load();
  if (failed * 20 > cfg.replications)
    throw NumericalError("more than 5% of replications failed (" +
                         std::to_string(failed) + "/" +
                         std::to_string(cfg.replications) + ")");
  const int used = cfg.replications - failed;

  std::vector<MetricsTable> tables;
  for (Method m : {Method::bayes, Method::debiased_bayes, Method::debiased_lasso})
    if (cfg.methods.count(m) > 0)
      tables.push_back(aggregate(m, results, scn.beta0, cfg.level, used));
  return tables;
}

void emit_report(const std::vector<MetricsTable>& tables, ReportFormat format,
                 const std::string& path) {
  if (tables.empty()) throw ConfigError("emit_report: no tables to write");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out.precision(10);

  switch (format) {
    case ReportFormat::csv: {
      out << "method,group,coverage,bias,rmse,replications,level\n";
      for (const auto& t : tables)
        for (const auto& [g, gm] : t.per_group)
          out << method_name(t.method) << ',' << g << ',' << gm.coverage << ','
              << gm.bias << ',' << gm.rmse << ',' << t.replications << ','
              << t.level << '\n';
      break;
    }
    case ReportFormat::json: {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& t : tables) {
        nlohmann::json jt;
        jt["method"] = method_name(t.method);
        jt["replications"] = t.replications;
        jt["level"] = t.level;
        nlohmann::json groups;
        for (const auto& [g, gm] : t.per_group) {
          groups[std::to_string(g)] = {
              {"coverage", gm.coverage}, {"bias", gm.bias}, {"rmse", gm.rmse}};
        }
        jt["groups"] = groups;
        j.push_back(jt);
      }
      out << j.dump(2) << '\n';
      break;
    }
    case ReportFormat::plotdata: {
      // one block per method, groups down the rows, blank line between blocks
      bool first = true;
      for (const auto& t : tables) {
        if (!first) out << '\n';
        first = false;
        for (const auto& [g, gm] : t.per_group)
          out << method_name(t.method) << ' ' << g << ' ' << gm.coverage << ' '
              << gm.bias << ' ' << gm.rmse << '\n';
      }
      break;
    }
  }
}

}  // namespace debayes
