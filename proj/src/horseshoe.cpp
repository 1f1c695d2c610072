#include "debayes/horseshoe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "debayes/errors.hpp"
#include "debayes/kernels.hpp"
#include "debayes/linalg.hpp"
#include "debayes/rng.hpp"

namespace debayes {

namespace {

// beta | rest ~ N(A^{-1} X'y / sigma^2, A^{-1}), A = X'X/sigma^2 + D^{-1}.
// p <= n: Cholesky of A.  p > n: the n-dimensional identity
//   u ~ N(0, D), delta ~ N(0, I_n), v = X u / sigma + delta,
//   w = (X D X'/sigma^2 + I)^{-1} (y/sigma - v),
//   beta = u + D X' w / sigma.
struct BetaSampler {
  const Matrix& x;
  const Vector& y;
  Matrix xtx;   // X'X, cached (p <= n path)
  Vector xty;   // X'y
  int* jitter_events;

  BetaSampler(const Dataset& d, int* jitter)
      : x(d.design()), y(d.response()), jitter_events(jitter) {
    const std::size_t p = x.cols();
    if (p <= x.rows()) {
      xtx = Matrix(p, p);
      for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* xi = x.row(i);
        for (std::size_t j = 0; j < p; ++j)
          if (xi[j] != 0.0) kernels::axpy(xtx.row(j), xi[j], xi, p);
      }
    }
    xty = matvec_transposed(x, y);
  }

  Vector draw(const Vector& lambda_sq, double sigma_sq, rng::Stream& stream) const {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (p <= n) {
      Matrix a = xtx;
      for (std::size_t k = 0; k < p * p; ++k) a.data()[k] /= sigma_sq;
      for (std::size_t j = 0; j < p; ++j) a(j, j) += 1.0 / lambda_sq[j];
      auto l = linalg::cholesky(a);
      if (!l) {
        for (std::size_t j = 0; j < p; ++j) a(j, j) += 1e-10;
        ++*jitter_events;
        l = linalg::cholesky(a);
        if (!l) throw NumericalError("horseshoe: conditional precision not PD");
      }
      Vector rhs = xty;
      for (double& v : rhs) v /= sigma_sq;
      const Vector mean = linalg::solve_lower_transposed(*l, linalg::solve_lower(*l, rhs));
      Vector zvec(p);
      for (double& v : zvec) v = stream.next_normal();
      Vector noise = linalg::solve_lower_transposed(*l, zvec);
      for (std::size_t j = 0; j < p; ++j) noise[j] += mean[j];
      return noise;
    }

    const double sigma = std::sqrt(sigma_sq);
    Vector u(p);
    for (std::size_t j = 0; j < p; ++j)
      u[j] = std::sqrt(lambda_sq[j]) * stream.next_normal();
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = kernels::dot(x.row(i), u.data(), p) / sigma + stream.next_normal();
    // M = X D X' / sigma^2 + I
    Matrix msmall(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i; k < n; ++k) {
        double s = 0.0;
        const double* xi = x.row(i);
        const double* xk = x.row(k);
        for (std::size_t j = 0; j < p; ++j) s += xi[j] * xk[j] * lambda_sq[j];
        msmall(i, k) = s / sigma_sq + (i == k ? 1.0 : 0.0);
        msmall(k, i) = msmall(i, k);
      }
    }
    Vector rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = y[i] / sigma - v[i];
    auto l = linalg::cholesky(msmall);
    if (!l) {
      for (std::size_t i = 0; i < n; ++i) msmall(i, i) += 1e-10;
      ++*jitter_events;
      l = linalg::cholesky(msmall);
      if (!l) throw NumericalError("horseshoe: n-space system not PD");
    }
    const Vector w = linalg::solve_lower_transposed(*l, linalg::solve_lower(*l, rhs));
    Vector beta = u;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = w[i] / sigma;
      const double* xi = x.row(i);
      for (std::size_t j = 0; j < p; ++j) beta[j] += lambda_sq[j] * xi[j] * c;
    }
    return beta;
  }
};

}  // namespace

PosteriorDrawSet sample_horseshoe(const Dataset& d, const HorseshoeConfig& cfg,
                                  HorseshoeDiagnostics* diag) {
  if (cfg.n_draws < 1) throw ConfigError("horseshoe: n_draws must be >= 1");
  if (cfg.burn_in < 0) throw ConfigError("horseshoe: burn_in must be >= 0");
  if (!(cfg.sigma_scale > 0.0)) throw ConfigError("horseshoe: sigma_scale must be positive");
  if (cfg.fixed_sigma && !(*cfg.fixed_sigma > 0.0))
    throw ConfigError("horseshoe: fixed_sigma must be positive");

  const std::size_t n = d.n();
  const std::size_t p = d.p();
  rng::Stream stream(cfg.seed, rng::stream_id(rng::Domain::horseshoe));
  HorseshoeDiagnostics local;
  HorseshoeDiagnostics* dg = diag != nullptr ? diag : &local;

  BetaSampler beta_sampler(d, &dg->jitter_events);

  // state; nu/xi/zeta are the inverse-gamma auxiliaries of the half-Cauchys
  Vector beta(p, 0.0);
  Vector lambda_sq(p, 1.0), nu(p, 1.0);
  double tau_sq = 1.0, xi = 1.0, zeta = 1.0;
  double sigma_sq = cfg.fixed_sigma ? (*cfg.fixed_sigma) * (*cfg.fixed_sigma) : 1.0;

  PosteriorDrawSet out;
  out.draws = Matrix(cfg.n_draws, p);
  out.prior_tag = PriorTag::horseshoe_mcmc;
  out.debiased = false;
  out.seed = cfg.seed;

  const int total = cfg.burn_in + cfg.n_draws;
  for (int it = 0; it < total; ++it) {
    beta = beta_sampler.draw(lambda_sq, sigma_sq, stream);

    // lambda_j^2 | . ~ IG(1, 1/nu_j + beta_j^2/2);  nu_j | . ~ IG(1, 1/tau^2 + 1/lambda_j^2)
    for (std::size_t j = 0; j < p; ++j) {
      lambda_sq[j] = stream.next_inverse_gamma(1.0, 1.0 / nu[j] + 0.5 * beta[j] * beta[j]);
      nu[j] = stream.next_inverse_gamma(1.0, 1.0 / tau_sq + 1.0 / lambda_sq[j]);
    }

    // tau^2 | . ~ IG((p+1)/2, 1/xi + sum_j 1/nu_j);  xi | . ~ IG(1, 1/sigma^2 + 1/tau^2)
    double inv_nu_sum = 0.0;
    for (std::size_t j = 0; j < p; ++j) inv_nu_sum += 1.0 / nu[j];
    tau_sq = stream.next_inverse_gamma(0.5 * (p + 1.0), 1.0 / xi + inv_nu_sum);
    xi = stream.next_inverse_gamma(1.0, 1.0 / sigma_sq + 1.0 / tau_sq);

    if (!cfg.fixed_sigma) {
      double rss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = d.response()[i] - kernels::dot(d.design().row(i), beta.data(), p);
        rss += r * r;
      }
      // sigma^2 | . ~ IG((n+2)/2, rss/2 + 1/xi + 1/zeta)
      sigma_sq = stream.next_inverse_gamma(0.5 * (n + 2.0), 0.5 * rss + 1.0 / xi + 1.0 / zeta);
      zeta = stream.next_inverse_gamma(
          1.0, 1.0 / (cfg.sigma_scale * cfg.sigma_scale) + 1.0 / sigma_sq);
    }

    if (it >= cfg.burn_in) {
      double* row = out.draws.row(it - cfg.burn_in);
      for (std::size_t j = 0; j < p; ++j) {
        if (!std::isfinite(beta[j]))
          throw NumericalError("horseshoe: non-finite draw at iteration " +
                               std::to_string(it) + ", coordinate " + std::to_string(j));
        row[j] = beta[j];
      }
      double min_lam = lambda_sq[0];
      for (double v : lambda_sq) min_lam = std::min(min_lam, v);
      if (it == cfg.burn_in) {
        dg->min_lambda_sq = min_lam;
        dg->min_tau_sq = tau_sq;
        dg->min_sigma_sq = sigma_sq;
      } else {
        dg->min_lambda_sq = std::min(dg->min_lambda_sq, min_lam);
        dg->min_tau_sq = std::min(dg->min_tau_sq, tau_sq);
        dg->min_sigma_sq = std::min(dg->min_sigma_sq, sigma_sq);
      }
    }
  }

  return out;
}

Vector horseshoe_prior_beta_draws(std::size_t count, std::uint64_t seed,
                                  double sigma_scale) {
  rng::Stream stream(seed, rng::stream_id(rng::Domain::horseshoe, 0xFFFFFF));
  Vector out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double sigma = stream.next_half_cauchy(sigma_scale);
    const double tau = stream.next_half_cauchy(sigma);
    const double lam = stream.next_half_cauchy(tau);
    out[i] = lam * stream.next_normal();
  }
  return out;
}

double potential_scale_reduction(const std::vector<Vector>& chains) {
  if (chains.size() < 2) throw ConfigError("psrf needs at least two chains");
  // split each chain in half
  std::vector<Vector> halves;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    if (half < 2) throw ConfigError("psrf: chains too short to split");
    halves.emplace_back(c.begin(), c.begin() + half);
    halves.emplace_back(c.end() - half, c.end());
  }
  const double m = static_cast<double>(halves.size());
  const double len = static_cast<double>(halves[0].size());

  double grand = 0.0;
  std::vector<double> means, vars;
  for (const auto& h : halves) {
    double mu = 0.0;
    for (double v : h) mu += v;
    mu /= len;
    double s2 = 0.0;
    for (double v : h) s2 += (v - mu) * (v - mu);
    s2 /= (len - 1.0);
    means.push_back(mu);
    vars.push_back(s2);
    grand += mu;
  }
  grand /= m;
  double between = 0.0;
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between *= len / (m - 1.0);
  double within = 0.0;
  for (double s2 : vars) within += s2;
  within /= m;
  const double var_plus = (len - 1.0) / len * within + between / len;
  return std::sqrt(var_plus / within);
}

void export_draws_csv(const Matrix& draws, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw DataError("cannot write " + path);
  for (std::size_t b = 0; b < draws.rows(); ++b) {
    for (std::size_t j = 0; j < draws.cols(); ++j)
      std::fprintf(f, j == 0 ? "%.17g" : ",%.17g", draws(b, j));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

}  // namespace debayes
