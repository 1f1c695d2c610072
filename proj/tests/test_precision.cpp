#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "debayes/errors.hpp"
#include "debayes/linalg.hpp"
#include "debayes/precision.hpp"
#include "debayes/rng.hpp"
#include "debayes/simplex_lp.hpp"

using namespace debayes;

namespace {

Dataset gaussian_dataset(std::size_t n, std::size_t p, std::uint64_t seed) {
  rng::Stream s(seed, rng::stream_id(rng::Domain::generic, 3));
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = s.next_normal();
  return Dataset(std::move(x), Vector(n, 0.0));
}

// gram exactly the identity: X = sqrt(n) I
Dataset orthonormal_dataset(std::size_t p) {
  Matrix x(p, p);
  for (std::size_t i = 0; i < p; ++i) x(i, i) = std::sqrt(static_cast<double>(p));
  return Dataset(std::move(x), Vector(p, 0.0));
}

double nodewise_bound(const PrecisionEstimate& e) {
  double m = 0.0;
  for (std::size_t j = 0; j < e.row_penalties.size(); ++j)
    m = std::max(m, e.row_penalties[j] / e.residual_scales[j]);
  return m;
}

}  // namespace

TEST_CASE("simplex solves small reference LPs") {
  // min -x -y s.t. x+2y<=4, 3x+y<=6 -> x=1.6, y=1.2
  Matrix a(2, 2);
  a(0, 0) = 1; a(0, 1) = 2;
  a(1, 0) = 3; a(1, 1) = 1;
  const auto r = lp::solve(a, {4, 6}, {-1, -1});
  REQUIRE(r.status == lp::Status::optimal);
  CHECK(r.x[0] == doctest::Approx(1.6));
  CHECK(r.x[1] == doctest::Approx(1.2));

  // negative rhs forces phase 1: x >= 2 via -x <= -2, minimize x
  Matrix a2(1, 1);
  a2(0, 0) = -1;
  const auto r2 = lp::solve(a2, {-2}, {1});
  REQUIRE(r2.status == lp::Status::optimal);
  CHECK(r2.x[0] == doctest::Approx(2.0));

  // infeasible: x <= 1 and x >= 2
  Matrix a3(2, 1);
  a3(0, 0) = 1;
  a3(1, 0) = -1;
  CHECK(lp::solve(a3, {1, -2}, {1}).status == lp::Status::infeasible);
}

TEST_CASE("orthogonal columns give a diagonal nodewise estimate") {
  Matrix x(4, 2);
  x(0, 0) = 1; x(1, 0) = -1;
  x(2, 1) = 2; x(3, 1) = -2;
  const Dataset d(std::move(x), Vector(4, 0.0));
  const auto est = nodewise_lasso(d, {0.05, 0.05});
  // theta_j = 0, tau_j^2 = mean square of the column
  CHECK(est.theta(0, 1) == 0.0);
  CHECK(est.theta(1, 0) == 0.0);
  CHECK(est.residual_scales[0] == doctest::Approx(0.5));   // (1+1)/4
  CHECK(est.residual_scales[1] == doctest::Approx(2.0));   // (4+4)/4
  CHECK(est.theta(0, 0) == doctest::Approx(2.0));
  CHECK(est.theta(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("vanishing penalty recovers the direct inverse") {
  const Dataset d = gaussian_dataset(200, 3, 7);
  const auto nw = nodewise_lasso(d, Vector(3, 1e-6));
  const auto di = direct_inverse(d);
  CHECK(max_abs_diff(nw.theta, di.theta) <= 0.01);
  const auto cl = clime(d, 1e-6);
  CHECK(max_abs_diff(cl.theta, di.theta) <= 0.01);
}

TEST_CASE("nodewise KKT bound holds and residual scales recompute exactly") {
  rng::Stream pick(100, 0);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = 20 + pick.next_u64() % 41;
    const std::size_t p = 2 + pick.next_u64() % 9;
    const double scale = 0.3 + 2.7 * pick.next_double();
    const Dataset d = gaussian_dataset(n, p, 1000 + rep);
    const Vector penalties(
        p, scale * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n)));
    const auto est = nodewise_lasso(d, penalties);

    CHECK(est.constraint_norm <= nodewise_bound(est) + 1e-6);

    // recompute tau_j^2 from the assembled row: row_j = (e_j - theta_j)/tau_j^2
    const Matrix g = gram_matrix(d);
    for (std::size_t j = 0; j < p; ++j) {
      const double tau_sq = est.residual_scales[j];
      double rss = g(j, j);
      double l1 = 0.0;
      for (std::size_t a = 0; a < p; ++a) {
        if (a == j) continue;
        const double coeff = -est.theta(j, a) * tau_sq;  // theta_{j,a}
        l1 += std::fabs(coeff);
        rss -= 2.0 * coeff * g(a, j);
        for (std::size_t b = 0; b < p; ++b) {
          if (b == j) continue;
          rss += coeff * (-est.theta(j, b) * tau_sq) * g(a, b);
        }
      }
      CHECK(std::fabs(rss + penalties[j] * l1 - tau_sq) < 1e-12 * (1.0 + tau_sq));
    }
  }
}

TEST_CASE("clime with identity gram shrinks to the constraint boundary") {
  const Dataset d = orthonormal_dataset(3);
  const auto est = clime(d, 0.1);
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t k = 0; k < 3; ++k) {
      if (j == k)
        CHECK(est.theta(j, k) == doctest::Approx(0.9).epsilon(1e-9));
      else
        CHECK(std::fabs(est.theta(j, k)) < 1e-9);
    }
  }
  CHECK(est.constraint_norm <= 0.1 + 1e-8);

  // exhaustive one-nonzero oracle: the best single-coordinate feasible
  // vector for row j is 0.9 e_j, anything else needs more l1 mass
  for (std::size_t j = 0; j < 3; ++j) {
    double best = 1e9;
    for (std::size_t k = 0; k < 3; ++k) {
      // |v - (k==j)| <= 0.1 and |0 - (l==j)| <= 0.1 for l != k must hold
      if (k != j) continue;  // zero elsewhere violates row j unless k == j
      best = std::min(best, 0.9);
    }
    double l1 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) l1 += std::fabs(est.theta(j, k));
    CHECK(l1 == doctest::Approx(best).epsilon(1e-9));
  }

  // kappa >= 1 admits the zero vector
  const auto zero = clime(d, 1.0);
  CHECK(max_abs(zero.theta) == 0.0);
}

TEST_CASE("clime rows are feasible and l1-minimal against random perturbations") {
  const Dataset d = gaussian_dataset(80, 4, 12);
  const double kappa = 0.25;
  const auto est = clime(d, kappa);
  const Matrix g = gram_matrix(d);
  CHECK(est.constraint_norm <= kappa + 1e-8);

  rng::Stream s(55, 0);
  for (std::size_t j = 0; j < 4; ++j) {
    Vector theta(4);
    for (std::size_t k = 0; k < 4; ++k) theta[k] = est.theta(j, k);
    double l1 = 0.0;
    for (double v : theta) l1 += std::fabs(v);
    for (int probe = 0; probe < 1000; ++probe) {
      Vector cand = theta;
      for (std::size_t k = 0; k < 4; ++k) cand[k] += 0.05 * s.next_normal();
      const Vector gc = matvec(g, cand);
      double viol = 0.0;
      for (std::size_t k = 0; k < 4; ++k)
        viol = std::max(viol, std::fabs(gc[k] - (k == j ? 1.0 : 0.0)));
      if (viol > kappa) continue;
      double cand_l1 = 0.0;
      for (double v : cand) cand_l1 += std::fabs(v);
      CHECK(cand_l1 >= l1 - 1e-9);
    }
  }
}

TEST_CASE("clime matches the max-norm bound on banded-truth data") {
  const std::size_t p = 5;
  Matrix theta0(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    theta0(j, j) = 1.0;
    if (j + 1 < p) {
      theta0(j, j + 1) = 0.5;
      theta0(j + 1, j) = 0.5;
    }
  }
  const Matrix omega0 = linalg::inverse_spd(theta0);
  const auto l = linalg::cholesky(theta0);
  REQUIRE(l.has_value());

  rng::Stream s(31, 0);
  const std::size_t n = 500;
  Matrix x(n, p);
  Vector z(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : z) v = s.next_normal();
    const Vector xi = linalg::solve_lower_transposed(*l, z);
    std::copy(xi.begin(), xi.end(), x.row(i));
  }
  const Dataset d(std::move(x), Vector(n, 0.0));

  const Matrix g = gram_matrix(d);
  const double kappa = inf_norm(theta0) * max_abs_diff(g, omega0) + 1e-12;
  const auto est = clime(d, kappa);
  CHECK(est.constraint_norm <= kappa + 1e-8);
  CHECK(max_abs_diff(est.theta, theta0) <= 4.0 * kappa * inf_norm(theta0));
}

TEST_CASE("clime symmetrization keeps the smaller entry") {
  const Dataset d = gaussian_dataset(60, 3, 77);
  const auto asym = clime(d, 0.2, false);
  const auto sym = clime(d, 0.2, true);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double expect = std::fabs(asym.theta(i, j)) <= std::fabs(asym.theta(j, i))
                                ? asym.theta(i, j)
                                : asym.theta(j, i);
      CHECK(sym.theta(i, j) == expect);
      CHECK(sym.theta(i, j) == sym.theta(j, i));
    }
}

TEST_CASE("direct inverse on known and random grams") {
  // gram = diag(0.5, 2)
  Matrix x(4, 2);
  x(0, 0) = 1.0; x(1, 0) = -1.0;  // column 0 mean sq 0.5
  x(2, 1) = 2.0; x(3, 1) = -2.0;  // column 1 mean sq 2
  const Dataset d(std::move(x), Vector(4, 0.0));
  const auto est = direct_inverse(d);
  CHECK(est.theta(0, 0) == doctest::Approx(2.0));
  CHECK(est.theta(1, 1) == doctest::Approx(0.5));
  CHECK(est.constraint_norm <= 1e-8);

  const Dataset big = gaussian_dataset(50, 4, 5);
  const auto inv = direct_inverse(big);
  const Matrix prod = matmul(inv.theta, gram_matrix(big));
  CHECK(max_abs_diff(prod, Matrix::identity(4)) < 1e-10);

  CHECK_THROWS_AS(direct_inverse(gaussian_dataset(3, 3, 1)), NumericalError);
}

TEST_CASE("default nodewise penalties") {
  const Vector v = default_nodewise_penalties(100, 100);
  CHECK(v.size() == 100);
  CHECK(v[0] == doctest::Approx(0.2145966).epsilon(1e-5));
  CHECK(default_nodewise_penalties(400, 100)[0] == doctest::Approx(0.1072983).epsilon(1e-5));
  CHECK_THROWS_AS(default_nodewise_penalties(100, 100, 0.0), ConfigError);
}

TEST_CASE("default clime kappa is positive and feasible") {
  const Dataset d = gaussian_dataset(150, 4, 9);
  const double kappa = default_clime_kappa(d);
  CHECK(kappa > 0.0);
  CHECK_NOTHROW(clime(d, kappa));
}
