#include "debayes/vb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "debayes/errors.hpp"
#include "debayes/kernels.hpp"
#include "debayes/lasso.hpp"
#include "debayes/linalg.hpp"
#include "debayes/parallel.hpp"
#include "debayes/rng.hpp"

#include "json.hpp"

namespace debayes {

namespace {

constexpr double kSqrt2OverPi = 0.7978845608028653558798921;  // sqrt(2/pi)
constexpr double kLogTwoPiE = 2.8378770664093454835606594;    // log(2 pi e)
constexpr double kLogTwoPi = 1.8378770664093454835606594;

// E|N(mu, s^2)| = s sqrt(2/pi) exp(-mu^2/(2s^2)) + mu erf(mu/(s sqrt(2)))
inline double folded_normal_mean(double mu, double s) {
  const double r = mu / s;
  return s * kSqrt2OverPi * std::exp(-0.5 * r * r) +
         mu * std::erf(r / 1.4142135623730950488);
}

// Slab-component objective for one coordinate, the constant 0.5*log(2 pi e)
// excluded: f(mu, s) = -(A/2)(mu^2 + s^2) + b mu - lambda E|N| + log s.
struct SlabObjective {
  double a, b, lambda;

  double value(double mu, double s) const {
    return -0.5 * a * (mu * mu + s * s) + b * mu -
           lambda * folded_normal_mean(mu, s) + std::log(s);
  }

  // f is strictly concave in mu; the root of f' lies in [(b-l)/A, (b+l)/A]
  double optimal_mu(double s, double init) const {
    if (a <= 0.0) return 0.0;
    double lo = (b - lambda) / a;
    double hi = (b + lambda) / a;
    double mu = std::clamp(init, lo, hi);
    for (int it = 0; it < 200; ++it) {
      const double r = mu / s;
      const double g = -a * mu + b - lambda * std::erf(r / 1.4142135623730950488);
      if (g > 0.0) lo = mu; else hi = mu;
      const double h = -a - lambda * kSqrt2OverPi / s * std::exp(-0.5 * r * r);
      double next = mu - g / h;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection safeguard
      if (std::fabs(next - mu) < 1e-12 * (1.0 + std::fabs(mu))) return next;
      mu = next;
    }
    return mu;
  }

  // d f / d s = 1/s - A s - lambda sqrt(2/pi) exp(-mu^2/(2 s^2)), strictly
  // decreasing in s, so the root is bracketed and unique.
  double optimal_s(double mu) const {
    const double c = lambda * kSqrt2OverPi;
    double lo, hi;
    if (a > 0.0) {
      lo = c > 0.0 ? (-c + std::sqrt(c * c + 4.0 * a)) / (2.0 * a) : 1.0 / std::sqrt(a);
      hi = 1.0 / std::sqrt(a);
    } else {
      // zero-variance column: optimum at s = 1/(lambda sqrt(2/pi))
      if (c <= 0.0) throw NumericalError("vb: degenerate slab scale");
      lo = hi = 1.0 / c;
    }
    if (hi - lo < 1e-15 * hi) return 0.5 * (lo + hi);
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double r = mu / s;
      const double e = std::exp(-0.5 * r * r);
      const double g = 1.0 / s - a * s - c * e;
      if (g > 0.0) lo = s; else hi = s;
      const double h = -1.0 / (s * s) - a - c * e * r * r / s;
      double next = s - g / h;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::fabs(next - s) < 1e-12 * s) return next;
      s = next;
    }
    return s;
  }
};

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

VariationalState fit_vb(const Dataset& d, const SpikeSlabPrior& prior,
                        const VbConfig& cfg) {
  if (!(prior.slab_lambda > 0.0)) throw ConfigError("vb: slab_lambda must be positive");
  if (!(prior.u > 0.0)) throw ConfigError("vb: u must be positive");
  if (!(prior.noise_variance > 0.0)) throw ConfigError("vb: noise_variance must be positive");
  if (!(cfg.tolerance > 0.0)) throw ConfigError("vb: tolerance must be positive");

  const std::size_t n = d.n();
  const std::size_t p = d.p();
  const double sigma0_sq = prior.noise_variance;
  const double lambda = prior.slab_lambda;

  const Matrix gram = gram_matrix(d);
  Vector z = matvec_transposed(d.design(), d.response());
  for (double& v : z) v /= static_cast<double>(n);
  const double y_sq = kernels::sum_sq(d.response().data(), n);

  // prior log-odds of inclusion from the Beta(1, p^u) mean
  const double p_u = std::pow(static_cast<double>(p), prior.u);
  const double prior_logit = -std::log(p_u);
  const double log_r = -std::log1p(p_u);          // log E[r]
  const double log_1mr = std::log(p_u) + log_r;   // log(1 - E[r])

  VariationalState st;
  st.mu.assign(p, 0.0);
  st.sigma2.assign(p, 0.0);
  st.gamma.assign(p, 0.5);
  if (cfg.ridge_init) {
    Matrix ridge = gram;
    for (std::size_t j = 0; j < p; ++j) ridge(j, j) += 1.0;
    st.mu = linalg::solve_spd(ridge, z);
  }
  for (std::size_t j = 0; j < p; ++j) {
    const double gjj = gram(j, j);
    st.sigma2[j] = gjj > 0.0 ? sigma0_sq / (static_cast<double>(n) * gjj)
                             : 2.0 / (lambda * lambda);
  }

  Vector m(p);
  for (std::size_t j = 0; j < p; ++j) m[j] = st.gamma[j] * st.mu[j];
  Vector t = matvec(gram, m);  // t = G m, maintained incrementally

  auto elbo = [&]() {
    // E||y - X beta||^2 in terms of the factor moments
    double expected_rss = y_sq;
    double corr = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      expected_rss += static_cast<double>(n) * m[j] * (t[j] - 2.0 * z[j]);
      const double eb2 = st.gamma[j] * (st.mu[j] * st.mu[j] + st.sigma2[j]);
      corr += (eb2 - m[j] * m[j]) * gram(j, j);
    }
    expected_rss += static_cast<double>(n) * corr;
    double value = -0.5 * static_cast<double>(n) * (kLogTwoPi + std::log(sigma0_sq)) -
                   expected_rss / (2.0 * sigma0_sq);
    for (std::size_t j = 0; j < p; ++j) {
      const double g = st.gamma[j];
      const double s = std::sqrt(st.sigma2[j]);
      value += g * (std::log(lambda / 2.0) - lambda * folded_normal_mean(st.mu[j], s) +
                    0.5 * (kLogTwoPiE + std::log(st.sigma2[j])));
      value += g * log_r + (1.0 - g) * log_1mr - xlogx(g) - xlogx(1.0 - g);
    }
    return value;
  };

  std::vector<std::size_t> order(p);
  for (std::size_t j = 0; j < p; ++j) order[j] = j;
  if (cfg.update_order) {
    if (cfg.update_order->size() != p)
      throw ConfigError("vb: update_order must be a permutation of 0..p-1");
    order = *cfg.update_order;
  }

  bool converged = false;
  int sweep = 0;
  for (; sweep < cfg.max_sweeps && !converged; ++sweep) {
    double max_change = 0.0;
    for (const std::size_t j : order) {
      const double gjj = gram(j, j);
      const double a = static_cast<double>(n) * gjj / sigma0_sq;
      const double b =
          static_cast<double>(n) * (z[j] - t[j] + gjj * m[j]) / sigma0_sq;
      SlabObjective obj{a, b, lambda};

      // alternate the two scalar problems; each step increases the bound
      double mu = st.mu[j];
      double s = std::sqrt(st.sigma2[j]);
      for (int round = 0; round < 8; ++round) {
        const double mu_next = obj.optimal_mu(s, mu);
        const double s_next = obj.optimal_s(mu_next);
        const bool settled = std::fabs(mu_next - mu) < 1e-11 * (1.0 + std::fabs(mu)) &&
                             std::fabs(s_next - s) < 1e-11 * s;
        mu = mu_next;
        s = s_next;
        if (settled) break;
      }

      const double evidence_gap =
          obj.value(mu, s) + std::log(lambda / 2.0) + 0.5 * kLogTwoPiE;
      const double gamma = sigmoid(prior_logit + evidence_gap);

      max_change = std::max({max_change, std::fabs(mu - st.mu[j]),
                             std::fabs(gamma - st.gamma[j])});
      st.mu[j] = mu;
      st.sigma2[j] = s * s;
      st.gamma[j] = gamma;
      const double m_new = gamma * mu;
      if (m_new != m[j]) {
        kernels::axpy(t.data(), m_new - m[j], gram.row(j), p);
        m[j] = m_new;
      }
    }
    st.elbo_trace.push_back(elbo());
    if (st.elbo_trace.size() >= 2) {
      const double prev = st.elbo_trace[st.elbo_trace.size() - 2];
      const double cur = st.elbo_trace.back();
      if (cur < prev - 1e-8 * (1.0 + std::fabs(prev))) {
        st.elbo_decreased = true;
#ifndef NDEBUG
        throw NumericalError("vb: evidence lower bound decreased across a sweep");
#endif
      }
    }
    if (max_change < cfg.tolerance) converged = true;
  }

  st.converged = converged;
  st.sweeps_used = sweep;
  return st;
}

PosteriorDrawSet sample_vb(const VariationalState& state, int b_draws,
                           std::uint64_t seed, int threads) {
  if (b_draws < 1) throw ConfigError("sample_vb: need at least one draw");
  const std::size_t p = state.mu.size();
  PosteriorDrawSet out;
  out.draws = Matrix(b_draws, p);
  out.prior_tag = PriorTag::spike_slab_vb;
  out.debiased = false;
  out.seed = seed;

  Vector sd(p);
  for (std::size_t j = 0; j < p; ++j) sd[j] = std::sqrt(state.sigma2[j]);

  parallel_for(static_cast<std::size_t>(b_draws), [&](std::size_t b) {
    rng::Stream stream(seed, rng::stream_id(rng::Domain::vb_sample, b));
    double* row = out.draws.row(b);
    for (std::size_t j = 0; j < p; ++j) {
      const double u = stream.next_double();
      row[j] = u < state.gamma[j] ? state.mu[j] + sd[j] * stream.next_normal() : 0.0;
    }
  }, threads);

  return out;
}

double plugin_noise_variance(const Dataset& d) {
  const int n = static_cast<int>(d.n());
  const int p = static_cast<int>(d.p());
  LassoConfig cfg;
  cfg.penalty = p > 1 ? default_penalty(n, p) : 0.0;
  const LassoFit fit = fit_lasso(d, cfg);

  const Vector fitted = matvec(d.design(), fit.coefficients);
  double rss = 0.0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    const double r = d.response()[i] - fitted[i];
    rss += r * r;
  }
  for (double c : fit.coefficients)
    if (c != 0.0) ++active;
  const double dof = std::max<double>(static_cast<double>(d.n()) - static_cast<double>(active), 1.0);
  return std::max(rss / dof, 1e-10);
}

void export_state_json(const VariationalState& state, const std::string& path) {
  nlohmann::json j;
  j["mu"] = state.mu;
  j["sigma2"] = state.sigma2;
  j["gamma"] = state.gamma;
  j["elbo_trace"] = state.elbo_trace;
  j["converged"] = state.converged;
  j["sweeps_used"] = state.sweeps_used;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

const char* prior_tag_name(PriorTag tag) {
  return tag == PriorTag::spike_slab_vb ? "spike_slab_vb" : "horseshoe_mcmc";
}

}  // namespace debayes
