#include "debayes/simplex_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace debayes::lp {

namespace {

constexpr double kEps = 1e-9;

struct Tableau {
  std::size_t m, total_cols;
  Matrix t;                    // (m+1) x (total_cols+1); last row = reduced costs
  std::vector<std::size_t> basis;

  double& rhs(std::size_t i) { return t(i, total_cols); }
  double& cost(std::size_t j) { return t(m, j); }

  void pivot(std::size_t pr, std::size_t pc) {
    const double pv = t(pr, pc);
    for (std::size_t j = 0; j <= total_cols; ++j) t(pr, j) /= pv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == pr) continue;
      const double f = t(i, pc);
      if (f != 0.0) kernels::axpy(t.row(i), -f, t.row(pr), total_cols + 1);
    }
    basis[pr] = pc;
  }

  // returns optimal / unbounded / iteration_limit for the current cost row
  Status iterate(std::size_t enter_limit, int max_iterations) {
    const int bland_after = 5 * static_cast<int>(m + total_cols) + 50;
    for (int it = 0; it < max_iterations; ++it) {
      const bool bland = it >= bland_after;
      // entering column
      std::size_t pc = total_cols;
      double best = -kEps;
      for (std::size_t j = 0; j < enter_limit; ++j) {
        const double r = t(m, j);
        if (r < best) {
          pc = j;
          best = r;
          if (bland) break;
        } else if (bland && r < -kEps) {
          pc = j;
          break;
        }
      }
      if (pc == total_cols) return Status::optimal;
      // ratio test
      std::size_t pr = m;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double a = t(i, pc);
        if (a > kEps) {
          const double ratio = rhs(i) / a;
          if (ratio < best_ratio - kEps ||
              (ratio < best_ratio + kEps && pr != m && basis[i] < basis[pr])) {
            best_ratio = ratio;
            pr = i;
          }
        }
      }
      if (pr == m) return Status::unbounded;
      pivot(pr, pc);
    }
    return Status::iteration_limit;
  }
};

}  // namespace

Result solve(const Matrix& a, const Vector& b, const Vector& c, int max_iterations) {
  const std::size_t m = a.rows();
  const std::size_t nv = a.cols();

  // count artificials: one per row with negative rhs
  std::size_t n_art = 0;
  for (double bi : b)
    if (bi < 0.0) ++n_art;

  Tableau tab;
  tab.m = m;
  tab.total_cols = nv + m + n_art;
  tab.t = Matrix(m + 1, tab.total_cols + 1);
  tab.basis.assign(m, 0);
  if (max_iterations <= 0)
    max_iterations = 200 * static_cast<int>(m + tab.total_cols) + 2000;

  std::size_t art = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < nv; ++j) tab.t(i, j) = sign * a(i, j);
    tab.t(i, nv + i) = sign;  // slack
    tab.rhs(i) = sign * b[i];
    if (b[i] < 0.0) {
      const std::size_t ac = nv + m + art++;
      tab.t(i, ac) = 1.0;
      tab.basis[i] = ac;
    } else {
      tab.basis[i] = nv + i;
    }
  }

  Result res;
  res.x.assign(nv, 0.0);

  if (n_art > 0) {
    // phase 1: minimize the artificial mass
    for (std::size_t j = nv + m; j < tab.total_cols; ++j) tab.cost(j) = 1.0;
    for (std::size_t i = 0; i < m; ++i)
      if (tab.basis[i] >= nv + m)
        kernels::axpy(tab.t.row(m), -1.0, tab.t.row(i), tab.total_cols + 1);
    const Status s1 = tab.iterate(tab.total_cols, max_iterations);
    if (s1 == Status::iteration_limit) {
      res.status = s1;
      return res;
    }
    const double art_mass = -tab.t(m, tab.total_cols);
    double scale = 1.0;
    for (double bi : b) scale = std::max(scale, std::fabs(bi));
    if (art_mass > 1e-8 * scale) {
      res.status = Status::infeasible;
      return res;
    }
    // pivot lingering artificials out where possible
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis[i] < nv + m) continue;
      for (std::size_t j = 0; j < nv + m; ++j) {
        if (std::fabs(tab.t(i, j)) > kEps) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  // phase 2 with the true costs
  for (std::size_t j = 0; j <= tab.total_cols; ++j) tab.cost(j) = 0.0;
  for (std::size_t j = 0; j < nv; ++j) tab.cost(j) = c[j];
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis[i] < nv && c[tab.basis[i]] != 0.0)
      kernels::axpy(tab.t.row(m), -c[tab.basis[i]], tab.t.row(i), tab.total_cols + 1);
  }
  const Status s2 = tab.iterate(nv + m, max_iterations);  // artificials never re-enter
  if (s2 != Status::optimal) {
    res.status = s2;
    return res;
  }

  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis[i] < nv) res.x[tab.basis[i]] = tab.rhs(i);
  res.objective = kernels::dot(c.data(), res.x.data(), nv);
  res.status = Status::optimal;
  return res;
}

}  // namespace debayes::lp
