#include "debayes/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "debayes/errors.hpp"

namespace debayes::linalg {

std::optional<Matrix> cholesky(const Matrix& a, double eps) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j) - kernels::sum_sq(l.row(j), j);
    if (!(diag > eps)) return std::nullopt;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double s = a(i, j) - kernels::dot(l.row(i), l.row(j), j);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Vector solve_lower(const Matrix& l, const Vector& b) {
  const std::size_t n = l.rows();
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = kernels::dot(l.row(i), x.data(), i);
    x[i] = (b[i] - s) / l(i, i);
  }
  return x;
}

Vector solve_lower_transposed(const Matrix& l, const Vector& b) {
  const std::size_t n = l.rows();
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = 0.0;
    for (std::size_t k = ii + 1; k < n; ++k) s += l(k, ii) * x[k];
    x[ii] = (b[ii] - s) / l(ii, ii);
  }
  return x;
}

Vector solve_spd(const Matrix& a, const Vector& b) {
  auto l = cholesky(a);
  if (!l) throw NumericalError("solve_spd: matrix is not positive definite");
  return solve_lower_transposed(*l, solve_lower(*l, b));
}

Matrix inverse_spd(const Matrix& a) {
  auto l = cholesky(a);
  if (!l) throw NumericalError("inverse_spd: matrix is not positive definite");
  const std::size_t n = a.rows();
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vector col = solve_lower_transposed(*l, solve_lower(*l, e));
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    e[j] = 0.0;
  }
  // symmetrize away the last-bit asymmetry from columnwise solves
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = v;
      inv(j, i) = v;
    }
  return inv;
}

namespace {
double one_norm(const Matrix& a) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::fabs(a(i, j));
    m = std::max(m, s);
  }
  return m;
}
}  // namespace

double condition_number_1(const Matrix& a) {
  auto l = cholesky(a);
  if (!l) return std::numeric_limits<double>::infinity();
  return one_norm(a) * one_norm(inverse_spd(a));
}

Vector ols(const Matrix& x, const Vector& y) {
  const std::size_t p = x.cols();
  Matrix xtx(p, p);
  Vector xty(p, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < p; ++j)
      kernels::axpy(xtx.row(j), xi[j], xi, p);
    kernels::axpy(xty.data(), y[i], xi, p);
  }
  return solve_spd(xtx, xty);
}

}  // namespace debayes::linalg
