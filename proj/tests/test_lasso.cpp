#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "debayes/errors.hpp"
#include "debayes/kernels.hpp"
#include "debayes/lasso.hpp"
#include "debayes/rng.hpp"

using namespace debayes;

namespace {

Dataset random_dataset(std::size_t n, std::size_t p, std::uint64_t seed,
                       double noise = 1.0) {
  rng::Stream s(seed, rng::stream_id(rng::Domain::generic, 0));
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = s.next_normal();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = x(i, 0) - 0.5 * x(i, p > 1 ? 1 : 0) + noise * s.next_normal();
  return Dataset(std::move(x), std::move(y));
}

double lasso_objective(const Dataset& d, const Vector& beta, double rho) {
  double rss = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    const double r =
        d.response()[i] - kernels::dot(d.design().row(i), beta.data(), d.p());
    rss += r * r;
  }
  double l1 = 0.0;
  for (double b : beta) l1 += std::fabs(b);
  return rss / static_cast<double>(d.n()) + rho * l1;
}

// independent convex oracle: proximal gradient (ISTA) with a conservative
// step size, run far past convergence
Vector ista_oracle(const Dataset& d, double rho, int iterations = 300000) {
  const std::size_t n = d.n();
  const std::size_t p = d.p();
  const Matrix g = gram_matrix(d);
  double trace = 0.0;
  for (std::size_t j = 0; j < p; ++j) trace += g(j, j);
  const double step = 0.45 / std::max(trace, 1e-12);
  Vector z = matvec_transposed(d.design(), d.response());
  for (double& v : z) v /= static_cast<double>(n);
  Vector beta(p, 0.0);
  for (int it = 0; it < iterations; ++it) {
    const Vector gb = matvec(g, beta);
    for (std::size_t j = 0; j < p; ++j) {
      const double grad = 2.0 * (gb[j] - z[j]);
      const double u = beta[j] - step * grad;
      const double t = step * rho;
      beta[j] = u > t ? u - t : (u < -t ? u + t : 0.0);
    }
  }
  return beta;
}

void check_kkt(const Dataset& d, const LassoFit& fit, double rho, double tol) {
  const std::size_t n = d.n();
  const std::size_t p = d.p();
  Vector resid(n);
  for (std::size_t i = 0; i < n; ++i)
    resid[i] = d.response()[i] -
               kernels::dot(d.design().row(i), fit.coefficients.data(), p);
  for (std::size_t j = 0; j < p; ++j) {
    double corr = 0.0;
    for (std::size_t i = 0; i < n; ++i) corr += d.design()(i, j) * resid[i];
    corr *= 2.0 / static_cast<double>(n);
    const double b = fit.coefficients[j];
    if (b != 0.0)
      CHECK(std::fabs(corr - rho * (b > 0 ? 1.0 : -1.0)) <= 10.0 * tol);
    else
      CHECK(std::fabs(corr) <= rho + 10.0 * tol);
  }
}

}  // namespace

TEST_CASE("orthonormal design gives the soft-threshold closed form") {
  // X = sqrt(n) * I stacked so that X'X/n = I
  const std::size_t p = 4;
  const std::size_t n = 4;
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i) x(i, i) = 2.0;  // n = 4, sqrt(n) = 2
  Vector y = {2.4, -1.0, 0.3, 4.0};
  const Dataset d(std::move(x), std::move(y));

  const Matrix g = gram_matrix(d);
  for (std::size_t i = 0; i < p; ++i) CHECK(g(i, i) == doctest::Approx(1.0));

  Vector z = matvec_transposed(d.design(), d.response());
  for (double& v : z) v /= static_cast<double>(n);

  const double rho = 0.8;
  LassoConfig cfg;
  cfg.penalty = rho;
  const LassoFit fit = fit_lasso(d, cfg);
  for (std::size_t j = 0; j < p; ++j) {
    const double t = rho / 2.0;
    const double expect = z[j] > t ? z[j] - t : (z[j] < -t ? z[j] + t : 0.0);
    CHECK(std::fabs(fit.coefficients[j] - expect) < 1e-10);
  }
}

TEST_CASE("penalty above 2||X'y/n||_inf zeroes the solution") {
  const Dataset d = random_dataset(12, 4, 99);
  Vector z = matvec_transposed(d.design(), d.response());
  double zmax = 0.0;
  for (double v : z) zmax = std::max(zmax, std::fabs(v) / static_cast<double>(d.n()));
  LassoConfig cfg;
  cfg.penalty = 2.0 * zmax * 1.0001;
  const LassoFit fit = fit_lasso(d, cfg);
  for (double b : fit.coefficients) CHECK(b == 0.0);
}

TEST_CASE("objective matches the independent convex oracle") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset d = random_dataset(6, 3, seed);
    const double rho = 0.3;
    LassoConfig cfg;
    cfg.penalty = rho;
    const LassoFit fit = fit_lasso(d, cfg);
    const Vector oracle = ista_oracle(d, rho);
    const double obj_cd = lasso_objective(d, fit.coefficients, rho);
    const double obj_oracle = lasso_objective(d, oracle, rho);
    CHECK(obj_cd <= obj_oracle + 1e-6);
    CHECK(std::fabs(obj_cd - obj_oracle) < 1e-6);
    // stored objective agrees with a direct evaluation
    CHECK(std::fabs(fit.objective - obj_cd) < 1e-10);
  }
}

TEST_CASE("KKT conditions hold at every converged fit") {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const Dataset d = random_dataset(30, 8, seed);
    LassoConfig cfg;
    cfg.penalty = 0.2;
    const LassoFit fit = fit_lasso(d, cfg);
    REQUIRE(fit.converged);
    check_kkt(d, fit, cfg.penalty, cfg.tolerance);
  }
}

TEST_CASE("objective is non-increasing across sweeps") {
  const Dataset d = random_dataset(40, 10, 4);
  LassoConfig cfg;
  cfg.penalty = 0.05;
  const LassoFit fit = fit_lasso(d, cfg);
  for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
    CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1] + 1e-12);
}

TEST_CASE("doubling max_iterations never increases the final objective") {
  const Dataset d = random_dataset(25, 12, 8);
  LassoConfig cfg;
  cfg.penalty = 0.1;
  cfg.tolerance = 1e-12;
  cfg.max_iterations = 5;
  const LassoFit coarse = fit_lasso(d, cfg);
  cfg.max_iterations = 10;
  const LassoFit fine = fit_lasso(d, cfg);
  CHECK(fine.objective <= coarse.objective + 1e-12);
}

TEST_CASE("solution is invariant to observation permutation") {
  const Dataset d = random_dataset(20, 5, 21);
  LassoConfig cfg;
  cfg.penalty = 0.15;
  const LassoFit fit = fit_lasso(d, cfg);

  // rotate rows
  Matrix x2(d.n(), d.p());
  Vector y2(d.n());
  for (std::size_t i = 0; i < d.n(); ++i) {
    const std::size_t src = (i + 7) % d.n();
    std::copy(d.design().row(src), d.design().row(src) + d.p(), x2.row(i));
    y2[i] = d.response()[src];
  }
  const Dataset d2(std::move(x2), std::move(y2));
  const LassoFit fit2 = fit_lasso(d2, cfg);
  for (std::size_t j = 0; j < d.p(); ++j)
    CHECK(std::fabs(fit.coefficients[j] - fit2.coefficients[j]) < 1e-8);
}

TEST_CASE("default_penalty arithmetic") {
  CHECK(default_penalty(100, 100, 1.0) == doctest::Approx(0.2145966).epsilon(1e-5));
  CHECK(default_penalty(100, 1, 1.0) == 0.0);
  CHECK(default_penalty(100, 200, 2.0) == doctest::Approx(0.4603614).epsilon(1e-5));
  CHECK_THROWS_AS(default_penalty(100, 100, 0.0), ConfigError);
}

TEST_CASE("warm starts and non-convergence flagging behave") {
  const Dataset d = random_dataset(30, 6, 31);
  LassoConfig cfg;
  cfg.penalty = 0.05;
  cfg.max_iterations = 1;
  cfg.tolerance = 1e-14;
  const LassoFit first = fit_lasso(d, cfg);
  CHECK_FALSE(first.converged);

  cfg.max_iterations = 10000;
  cfg.warm_start = first.coefficients;
  const LassoFit second = fit_lasso(d, cfg);
  CHECK(second.converged);
  CHECK(second.objective <= first.objective + 1e-12);
}

TEST_CASE("cross-validation selector returns a grid penalty that fits") {
  const Dataset d = random_dataset(60, 8, 5, 0.5);
  const double rho = cv_penalty(d, 123, 5, 20);
  CHECK(rho > 0.0);
  // the CV pick should beat the most extreme grid point on in-sample loss
  LassoConfig cfg;
  cfg.penalty = rho;
  const LassoFit fit = fit_lasso(d, cfg);
  CHECK(fit.converged);
}
