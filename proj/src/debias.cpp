#include "debayes/debias.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "debayes/errors.hpp"
#include "debayes/kernels.hpp"
#include "debayes/parallel.hpp"
#include "debayes/rng.hpp"
#include "debayes/stats.hpp"

namespace debayes {

namespace {

void fill_weights(double* w, std::size_t n, rng::Stream& stream) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = stream.next_exponential();
    total += w[i];
  }
  const double inv = 1.0 / total;
  for (std::size_t i = 0; i < n; ++i) w[i] *= inv;
}

// core transform writing into `out`, with caller-owned scratch
void debias_into(const Vector& beta, const double* w, const PrecisionEstimate& theta,
                 const Dataset& d, Vector& yhat, Vector& wres, Vector& corr,
                 double* out) {
  const std::size_t n = d.n();
  const std::size_t p = d.p();
  const Matrix& x = d.design();
  for (std::size_t i = 0; i < n; ++i)
    yhat[i] = kernels::dot(x.row(i), beta.data(), p);
  kernels::weighted_residual(wres.data(), w, d.response().data(), yhat.data(), n);
  std::fill(corr.begin(), corr.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (wres[i] != 0.0) kernels::axpy(corr.data(), wres[i], x.row(i), p);
  for (std::size_t j = 0; j < p; ++j)
    out[j] = beta[j] + kernels::dot(theta.theta.row(j), corr.data(), p);
}

}  // namespace

std::vector<WeightVector> draw_weights(int n, int b_draws, std::uint64_t seed) {
  if (n < 1) throw ConfigError("draw_weights: n must be >= 1");
  if (b_draws < 1) throw ConfigError("draw_weights: B must be >= 1");
  std::vector<WeightVector> out(b_draws);
  for (int b = 0; b < b_draws; ++b) {
    out[b].weights.resize(n);
    rng::Stream stream(seed, rng::stream_id(rng::Domain::weights, b));
    fill_weights(out[b].weights.data(), n, stream);
  }
  return out;
}

Vector debias_draw(const Vector& beta, const WeightVector& w,
                   const PrecisionEstimate& theta, const Dataset& d) {
  const std::size_t n = d.n();
  const std::size_t p = d.p();
  if (beta.size() != p) throw ConfigError("debias_draw: beta has wrong length");
  if (w.weights.size() != n) throw ConfigError("debias_draw: weights have wrong length");
  if (theta.theta.rows() != p || theta.theta.cols() != p)
    throw ConfigError("debias_draw: precision estimate has wrong shape");
  Vector yhat(n), wres(n), corr(p), out(p);
  debias_into(beta, w.weights.data(), theta, d, yhat, wres, corr, out.data());
  return out;
}

DebiasedDrawSet run_algorithm1(const Dataset& d, const PosteriorDrawSet& initial,
                               const PrecisionEstimate& theta, std::uint64_t seed,
                               int threads) {
  if (initial.debiased) throw ConfigError("run_algorithm1: draws are already debiased");
  const std::size_t p = d.p();
  const std::size_t n = d.n();
  if (initial.draws.cols() != p)
    throw ConfigError("run_algorithm1: draw width does not match dataset");
  if (theta.theta.rows() != p)
    throw ConfigError("run_algorithm1: precision estimate has wrong shape");

  const std::size_t b_total = initial.draws.rows();
  DebiasedDrawSet out;
  out.draws = Matrix(b_total, p);
  out.source_prior = initial.prior_tag;
  out.precision_method = theta.method;
  out.seed = seed;

  parallel_for(b_total, [&](std::size_t b) {
    // thread-local scratch; weight stream keyed by (seed, b) only
    Vector beta(initial.draws.row(b), initial.draws.row(b) + p);
    Vector w(n), yhat(n), wres(n), corr(p);
    rng::Stream stream(seed, rng::stream_id(rng::Domain::weights, b));
    fill_weights(w.data(), n, stream);
    debias_into(beta, w.data(), theta, d, yhat, wres, corr, out.draws.row(b));
  }, threads);

  return out;
}

Vector debiased_lasso(const Dataset& d, const PrecisionEstimate& theta,
                      const LassoConfig& lasso_cfg) {
  const LassoFit pilot = fit_lasso(d, lasso_cfg);
  const std::size_t n = d.n();
  const std::size_t p = d.p();
  const Matrix& x = d.design();
  Vector yhat = matvec(x, pilot.coefficients);
  Vector corr(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    kernels::axpy(corr.data(), d.response()[i] - yhat[i], x.row(i), p);
  Vector out(p);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < p; ++j)
    out[j] = pilot.coefficients[j] +
             inv_n * kernels::dot(theta.theta.row(j), corr.data(), p);
  return out;
}

CredibleInterval credible_interval(const Matrix& draws, std::size_t j, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("credible_interval: alpha must lie in (0,1)");
  if (j >= draws.cols()) throw ConfigError("credible_interval: index out of range");
  if (draws.rows() < 2) throw ConfigError("credible_interval: need at least 2 draws");
  std::vector<double> col(draws.rows());
  for (std::size_t b = 0; b < draws.rows(); ++b) col[b] = draws(b, j);
  std::sort(col.begin(), col.end());
  CredibleInterval ci;
  ci.lower = stats::quantile_sorted(col, alpha / 2.0);
  ci.upper = stats::quantile_sorted(col, 1.0 - alpha / 2.0);
  ci.level = 1.0 - alpha;
  ci.coefficient_index = j;
  return ci;
}

CredibleInterval credible_interval(const DebiasedDrawSet& draws, std::size_t j,
                                   double alpha) {
  return credible_interval(draws.draws, j, alpha);
}

Vector estimate_sandwich_variance(const Dataset& d, const PrecisionEstimate& theta,
                                  const Vector& residual_source) {
  const std::size_t n = d.n();
  const std::size_t p = d.p();
  if (residual_source.size() != p)
    throw ConfigError("estimate_sandwich_variance: coefficient length mismatch");
  const Matrix& x = d.design();
  // M = (1/n) sum_i e_i^2 X_i X_i'
  Matrix meat(p, p);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.row(i);
    const double resid =
        d.response()[i] - kernels::dot(xi, residual_source.data(), p);
    const double e2 = resid * resid / static_cast<double>(n);
    for (std::size_t j = 0; j < p; ++j)
      if (xi[j] != 0.0) kernels::axpy(meat.row(j), e2 * xi[j], xi, p);
  }
  Vector out(p);
  Vector tmp(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double* row = theta.theta.row(j);
    for (std::size_t k = 0; k < p; ++k) tmp[k] = kernels::dot(meat.row(k), row, p);
    out[j] = kernels::dot(row, tmp.data(), p);
  }
  return out;
}

void export_interval_table_csv(const std::vector<CredibleInterval>& intervals,
                               const Vector& means,
                               const std::vector<std::string>& names,
                               const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw DataError("cannot write " + path);
  std::fputs("index,name,mean,lower,upper,level\n", f);
  for (std::size_t j = 0; j < intervals.size(); ++j) {
    const std::string name = j < names.size() ? names[j] : "x" + std::to_string(j + 1);
    std::fprintf(f, "%zu,%s,%.17g,%.17g,%.17g,%g\n", intervals[j].coefficient_index,
                 name.c_str(), means[j], intervals[j].lower, intervals[j].upper,
                 intervals[j].level);
  }
  std::fclose(f);
}

}  // namespace debayes
