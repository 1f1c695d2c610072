#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "debayes/errors.hpp"
#include "debayes/horseshoe.hpp"
#include "debayes/rng.hpp"
#include "debayes/stats.hpp"

using namespace debayes;

namespace {

Dataset strong_signal_p1(std::size_t n, std::uint64_t seed) {
  rng::Stream s(seed, rng::stream_id(rng::Domain::generic, 8));
  Matrix x(n, 1);
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = s.next_normal();
    y[i] = 2.0 * x(i, 0) + s.next_normal();
  }
  return Dataset(std::move(x), std::move(y));
}

}  // namespace

TEST_CASE("p=1 strong signal recovers the least-squares estimate") {
  const Dataset d = strong_signal_p1(500, 4);
  double xx = 0.0, xy = 0.0;
  for (std::size_t i = 0; i < 500; ++i) {
    xx += d.design()(i, 0) * d.design()(i, 0);
    xy += d.design()(i, 0) * d.response()[i];
  }
  const double ols = xy / xx;

  HorseshoeConfig cfg;
  cfg.n_draws = 4000;
  cfg.burn_in = 2000;
  cfg.seed = 17;
  HorseshoeDiagnostics diag;
  const PosteriorDrawSet ds = sample_horseshoe(d, cfg, &diag);
  REQUIRE(ds.draws.rows() == 4000);
  double mean = 0.0;
  for (std::size_t b = 0; b < 4000; ++b) mean += ds.draws(b, 0);
  mean /= 4000.0;
  CHECK(std::fabs(mean - ols) < 0.1);
  CHECK(ds.prior_tag == PriorTag::horseshoe_mcmc);

  // every retained scale stayed strictly positive
  CHECK(diag.min_lambda_sq > 0.0);
  CHECK(diag.min_tau_sq > 0.0);
  CHECK(diag.min_sigma_sq > 0.0);
}

TEST_CASE("zero response shrinks every coordinate hard") {
  rng::Stream s(5, 0);
  const std::size_t n = 100, p = 3;
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = s.next_normal();
  const Dataset d(std::move(x), Vector(n, 0.0));
  const Matrix g = gram_matrix(d);

  HorseshoeConfig cfg;
  cfg.n_draws = 2000;
  cfg.burn_in = 1000;
  cfg.seed = 3;
  const PosteriorDrawSet ds = sample_horseshoe(d, cfg);
  for (std::size_t j = 0; j < p; ++j) {
    const double bound = 3.0 / std::sqrt(static_cast<double>(n) * g(j, j));
    int inside = 0;
    for (std::size_t b = 0; b < ds.draws.rows(); ++b)
      if (std::fabs(ds.draws(b, j)) <= bound) ++inside;
    CHECK(static_cast<double>(inside) / static_cast<double>(ds.draws.rows()) >= 0.95);
  }
}

TEST_CASE("chains are bit-identical under a fixed seed") {
  const Dataset d = strong_signal_p1(60, 9);
  HorseshoeConfig cfg;
  cfg.n_draws = 300;
  cfg.burn_in = 100;
  cfg.seed = 42;
  const PosteriorDrawSet a = sample_horseshoe(d, cfg);
  const PosteriorDrawSet b = sample_horseshoe(d, cfg);
  CHECK(a.draws == b.draws);
}

TEST_CASE("split-chain scale reduction is small on the p=1 instance") {
  const Dataset d = strong_signal_p1(200, 12);
  std::vector<Vector> chains;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    HorseshoeConfig cfg;
    cfg.n_draws = 2000;
    cfg.burn_in = 500;
    cfg.seed = 100 + seed;
    const PosteriorDrawSet ds = sample_horseshoe(d, cfg);
    Vector chain(ds.draws.rows());
    for (std::size_t b = 0; b < ds.draws.rows(); ++b) chain[b] = ds.draws(b, 0);
    chains.push_back(std::move(chain));
  }
  CHECK(potential_scale_reduction(chains) < 1.1);
}

TEST_CASE("prior draws have the horseshoe's heavy tail") {
  const Vector draws = horseshoe_prior_beta_draws(1000000, 7);
  Vector abs(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) abs[i] = std::fabs(draws[i]);
  const double q999 = stats::quantile(abs, 0.999);
  const double q90 = stats::quantile(abs, 0.9);
  CHECK(q999 > 10.0 * q90);
}

TEST_CASE("p > n path runs, is deterministic, and finds the big signal") {
  rng::Stream s(21, 0);
  const std::size_t n = 20, p = 30;
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = s.next_normal();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = 3.0 * x(i, 0) + 0.5 * s.next_normal();
  const Dataset d(std::move(x), std::move(y));

  HorseshoeConfig cfg;
  cfg.n_draws = 1500;
  cfg.burn_in = 500;
  cfg.seed = 8;
  const PosteriorDrawSet a = sample_horseshoe(d, cfg);
  const PosteriorDrawSet b = sample_horseshoe(d, cfg);
  CHECK(a.draws == b.draws);
  double mean0 = 0.0;
  for (std::size_t r = 0; r < a.draws.rows(); ++r) mean0 += a.draws(r, 0);
  mean0 /= static_cast<double>(a.draws.rows());
  CHECK(mean0 > 1.5);
  CHECK(mean0 < 4.5);
}

TEST_CASE("fixed-sigma mode holds the noise scale") {
  const Dataset d = strong_signal_p1(80, 2);
  HorseshoeConfig cfg;
  cfg.n_draws = 400;
  cfg.burn_in = 200;
  cfg.seed = 5;
  cfg.fixed_sigma = 1.0;
  HorseshoeDiagnostics diag;
  const PosteriorDrawSet ds = sample_horseshoe(d, cfg, &diag);
  CHECK(ds.draws.rows() == 400);
  CHECK(diag.min_sigma_sq == 1.0);
}

TEST_CASE("config validation") {
  const Dataset d = strong_signal_p1(20, 1);
  HorseshoeConfig cfg;
  cfg.n_draws = 0;
  CHECK_THROWS_AS(sample_horseshoe(d, cfg), ConfigError);
  cfg = {};
  cfg.sigma_scale = 0.0;
  CHECK_THROWS_AS(sample_horseshoe(d, cfg), ConfigError);
}
