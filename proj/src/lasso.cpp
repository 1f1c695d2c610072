#include "debayes/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "debayes/errors.hpp"
#include "debayes/kernels.hpp"
#include "debayes/rng.hpp"

namespace debayes {

namespace {

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// objective = y_sq_mean - 2 z'b + b'Gb + rho ||b||_1, with q = G b maintained
double covariance_objective(const Vector& beta, const Vector& z, const Vector& q,
                            double y_sq_mean, double rho) {
  const std::size_t p = beta.size();
  double quad = y_sq_mean;
  double l1 = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    quad += beta[j] * (q[j] - 2.0 * z[j]);
    l1 += std::fabs(beta[j]);
  }
  return quad + rho * l1;
}

}  // namespace

LassoFit lasso_covariance(const Matrix& gram, const Vector& crossprod,
                          double y_sq_mean, const LassoConfig& cfg) {
  if (cfg.penalty < 0.0) throw ConfigError("lasso penalty must be nonnegative");
  if (!(cfg.tolerance > 0.0)) throw ConfigError("lasso tolerance must be positive");
  const std::size_t p = gram.rows();
  const double rho = cfg.penalty;

  Vector beta(p, 0.0);
  if (cfg.warm_start) {
    if (cfg.warm_start->size() != p) throw ConfigError("warm start has wrong length");
    beta = *cfg.warm_start;
  }

  // q = G beta, updated incrementally as coordinates move
  Vector q(p, 0.0);
  for (std::size_t j = 0; j < p; ++j)
    if (beta[j] != 0.0) kernels::axpy(q.data(), beta[j], gram.row(j), p);

  LassoFit fit;
  fit.objective_trace.reserve(16);
  int sweeps = 0;
  bool converged = false;
  while (sweeps < cfg.max_iterations) {
    ++sweeps;
    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double gjj = gram(j, j);
      const double old = beta[j];
      double updated = 0.0;
      if (gjj > 0.0) {
        // c = (2/n) X_j' (y - X_{-j} b_{-j}) in covariance form
        const double c = 2.0 * (crossprod[j] - q[j] + gjj * old);
        updated = soft_threshold(c, rho) / (2.0 * gjj);
      }
      if (updated != old) {
        kernels::axpy(q.data(), updated - old, gram.row(j), p);
        beta[j] = updated;
        max_change = std::max(max_change, std::fabs(updated - old));
      }
    }
    fit.objective_trace.push_back(
        covariance_objective(beta, crossprod, q, y_sq_mean, rho));
    if (max_change < cfg.tolerance) {
      converged = true;
      break;
    }
  }

  fit.coefficients = std::move(beta);
  fit.iterations_used = sweeps;
  fit.converged = converged;
  fit.objective = fit.objective_trace.empty()
                      ? covariance_objective(fit.coefficients, crossprod, q, y_sq_mean, rho)
                      : fit.objective_trace.back();
  return fit;
}

LassoFit fit_lasso(const Dataset& d, const LassoConfig& cfg) {
  const Matrix gram = gram_matrix(d);
  const std::size_t n = d.n();
  Vector crossprod = matvec_transposed(d.design(), d.response());
  for (double& v : crossprod) v /= static_cast<double>(n);
  const double y_sq_mean =
      kernels::sum_sq(d.response().data(), n) / static_cast<double>(n);
  return lasso_covariance(gram, crossprod, y_sq_mean, cfg);
}

double default_penalty(int n, int p, double scale) {
  if (n < 2) throw ConfigError("default_penalty: n must be >= 2");
  if (p < 1) throw ConfigError("default_penalty: p must be >= 1");
  if (!(scale > 0.0)) throw ConfigError("default_penalty: scale must be positive");
  return scale * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

double cv_penalty(const Dataset& d, std::uint64_t seed, int folds, int grid_size) {
  const std::size_t n = d.n();
  const std::size_t p = d.p();
  if (folds < 2 || static_cast<std::size_t>(folds) > n)
    throw ConfigError("cv_penalty: folds must be in [2, n]");

  // grid from rho_max (all-zero solution) down three decades
  Vector crossprod = matvec_transposed(d.design(), d.response());
  double rho_max = 0.0;
  for (double v : crossprod) rho_max = std::max(rho_max, std::fabs(v) * 2.0 / n);
  if (rho_max <= 0.0) return 0.0;
  Vector grid(grid_size);
  for (int k = 0; k < grid_size; ++k)
    grid[k] = rho_max * std::pow(1e-3, static_cast<double>(k) / (grid_size - 1));

  // deterministic shuffle for fold assignment
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng::Stream stream(seed, rng::stream_id(rng::Domain::cv_folds));
  for (std::size_t i = n; i-- > 1;) {
    const std::size_t j = stream.next_u64() % (i + 1);
    std::swap(perm[i], perm[j]);
  }

  Vector cv_error(grid_size, 0.0);
  for (int f = 0; f < folds; ++f) {
    const std::size_t lo = n * f / folds;
    const std::size_t hi = n * (f + 1) / folds;
    const std::size_t n_train = n - (hi - lo);
    if (n_train < 2) continue;
    Matrix x_train(n_train, p);
    Vector y_train(n_train);
    std::size_t r = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k >= lo && k < hi) continue;
      const std::size_t i = perm[k];
      std::copy(d.design().row(i), d.design().row(i) + p, x_train.row(r));
      y_train[r] = d.response()[i];
      ++r;
    }
    Dataset train(std::move(x_train), std::move(y_train));
    const Matrix gram = gram_matrix(train);
    Vector z = matvec_transposed(train.design(), train.response());
    for (double& v : z) v /= static_cast<double>(n_train);
    const double ysq = kernels::sum_sq(train.response().data(), n_train) /
                       static_cast<double>(n_train);

    // warm-start down the path
    LassoConfig cfg;
    Vector warm(p, 0.0);
    for (int k = 0; k < grid_size; ++k) {
      cfg.penalty = grid[k];
      cfg.warm_start = warm;
      const LassoFit fit = lasso_covariance(gram, z, ysq, cfg);
      warm = fit.coefficients;
      for (std::size_t v = lo; v < hi; ++v) {
        const std::size_t i = perm[v];
        const double pred = kernels::dot(d.design().row(i), warm.data(), p);
        const double err = d.response()[i] - pred;
        cv_error[k] += err * err;
      }
    }
  }

  const auto best = std::min_element(cv_error.begin(), cv_error.end());
  return grid[static_cast<std::size_t>(best - cv_error.begin())];
}

}  // namespace debayes
