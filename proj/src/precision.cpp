#include "debayes/precision.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "debayes/errors.hpp"
#include "debayes/linalg.hpp"
#include "debayes/parallel.hpp"
#include "debayes/simplex_lp.hpp"

#include "json.hpp"

namespace debayes {

const char* precision_method_name(PrecisionMethod m) {
  switch (m) {
    case PrecisionMethod::nodewise: return "nodewise";
    case PrecisionMethod::clime: return "clime";
    case PrecisionMethod::direct_inverse: return "direct_inverse";
  }
  return "?";
}

namespace {

double constraint_norm(const Matrix& theta, const Matrix& gram) {
  const std::size_t p = theta.rows();
  double norm = 0.0;
  Vector row(p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      // (Theta G)_ij; G symmetric so G column j is row j
      const double v = kernels::dot(theta.row(i), gram.row(j), p);
      norm = std::max(norm, std::fabs(v - (i == j ? 1.0 : 0.0)));
    }
  }
  return norm;
}

}  // namespace

PrecisionEstimate nodewise_lasso(const Dataset& d, const Vector& penalties,
                                 int threads) {
  const std::size_t p = d.p();
  if (p < 2) throw ConfigError("nodewise_lasso requires p >= 2");
  if (penalties.size() != p) throw ConfigError("need one penalty per covariate");
  for (double l : penalties)
    if (!(l > 0.0)) throw ConfigError("nodewise penalties must be positive");

  const Matrix gram = gram_matrix(d);

  PrecisionEstimate est;
  est.method = PrecisionMethod::nodewise;
  est.theta = Matrix(p, p);
  est.row_penalties = penalties;
  est.residual_scales.assign(p, 0.0);

  std::vector<std::string> row_errors(p);
  std::vector<char> converged(p, 1);

  parallel_for(p, [&](std::size_t j) {
    // subproblem gram/crossprod are contiguous pulls from the full gram
    Matrix sub(p - 1, p - 1);
    Vector cross(p - 1);
    std::size_t r = 0;
    for (std::size_t a = 0; a < p; ++a) {
      if (a == j) continue;
      cross[r] = gram(a, j);
      std::size_t s = 0;
      for (std::size_t b = 0; b < p; ++b) {
        if (b == j) continue;
        sub(r, s++) = gram(a, b);
      }
      ++r;
    }

    LassoConfig cfg;
    cfg.penalty = 2.0 * penalties[j];
    const LassoFit fit = lasso_covariance(sub, cross, gram(j, j), cfg);
    if (!fit.converged) converged[j] = 0;

    double l1 = 0.0;
    for (double v : fit.coefficients) l1 += std::fabs(v);
    // residual variance: (1/n)||X_j - X_{-j} theta||^2 + lambda_j ||theta||_1
    double rss = gram(j, j);
    for (std::size_t k = 0; k < p - 1; ++k) {
      double gq = 0.0;
      for (std::size_t l = 0; l < p - 1; ++l) gq += sub(k, l) * fit.coefficients[l];
      rss += fit.coefficients[k] * (gq - 2.0 * cross[k]);
    }
    const double tau_sq = rss + penalties[j] * l1;
    if (!(tau_sq > 0.0)) {
      row_errors[j] = "degenerate column " + std::to_string(j) +
                      ": nodewise residual scale is not positive";
      return;
    }
    est.residual_scales[j] = tau_sq;

    double* row = est.theta.row(j);
    row[j] = 1.0 / tau_sq;
    r = 0;
    for (std::size_t a = 0; a < p; ++a) {
      if (a == j) continue;
      row[a] = -fit.coefficients[r++] / tau_sq;
    }
  }, threads);

  for (const auto& err : row_errors)
    if (!err.empty()) throw NumericalError(err);
  for (char c : converged)
    if (!c) est.all_converged = false;

  est.constraint_norm = constraint_norm(est.theta, gram);
  return est;
}

PrecisionEstimate clime(const Dataset& d, double kappa, bool symmetrize,
                        int threads) {
  const std::size_t p = d.p();
  if (!(kappa > 0.0)) throw ConfigError("clime: kappa must be positive");
  const Matrix gram = gram_matrix(d);

  PrecisionEstimate est;
  est.method = PrecisionMethod::clime;
  est.theta = Matrix(p, p);
  est.row_penalties.assign(p, kappa);

  // rowwise LP: min 1'(t+ + t-) s.t. [G -G; -G G](t+;t-) <= [k1+e_j; k1-e_j]
  Matrix a(2 * p, 2 * p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      a(i, j) = gram(i, j);
      a(i, p + j) = -gram(i, j);
      a(p + i, j) = -gram(i, j);
      a(p + i, p + j) = gram(i, j);
    }
  const Vector cost(2 * p, 1.0);

  std::vector<std::string> row_errors(p);
  parallel_for(p, [&](std::size_t j) {
    Vector b(2 * p, kappa);
    b[j] += 1.0;
    b[p + j] -= 1.0;
    const lp::Result sol = lp::solve(a, b, cost);
    if (sol.status == lp::Status::infeasible) {
      row_errors[j] = "clime row " + std::to_string(j) +
                      " infeasible: kappa too small";
      return;
    }
    if (sol.status != lp::Status::optimal) {
      row_errors[j] = "clime row " + std::to_string(j) + ": LP iteration cap exceeded";
      return;
    }
    for (std::size_t k = 0; k < p; ++k)
      est.theta(j, k) = sol.x[k] - sol.x[p + k];
  }, threads);
  for (const auto& err : row_errors)
    if (!err.empty()) throw NumericalError(err);

  if (symmetrize) {
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) {
        const double keep = std::fabs(est.theta(i, j)) <= std::fabs(est.theta(j, i))
                                ? est.theta(i, j)
                                : est.theta(j, i);
        est.theta(i, j) = keep;
        est.theta(j, i) = keep;
      }
  }

  est.constraint_norm = constraint_norm(est.theta, gram);
  return est;
}

PrecisionEstimate direct_inverse(const Dataset& d) {
  if (d.p() >= d.n())
    throw NumericalError("direct_inverse requires p < n (got p=" +
                         std::to_string(d.p()) + ", n=" + std::to_string(d.n()) + ")");
  const Matrix gram = gram_matrix(d);
  const double cond = linalg::condition_number_1(gram);
  if (!(cond < 1e12))
    throw NumericalError("gram matrix is singular or ill-conditioned (cond_1 ~ " +
                         std::to_string(cond) + ")");
  PrecisionEstimate est;
  est.method = PrecisionMethod::direct_inverse;
  est.theta = linalg::inverse_spd(gram);
  est.row_penalties.assign(d.p(), 0.0);
  est.constraint_norm = constraint_norm(est.theta, gram);
  return est;
}

Vector default_nodewise_penalties(int n, int p, double scale) {
  if (p < 2) throw ConfigError("default_nodewise_penalties: p must be >= 2");
  if (n < 2) throw ConfigError("default_nodewise_penalties: n must be >= 2");
  if (!(scale > 0.0))
    throw ConfigError("default_nodewise_penalties: penalty scale must be positive");
  return Vector(p, scale * std::sqrt(std::log(static_cast<double>(p)) /
                                     static_cast<double>(n)));
}

double default_clime_kappa(const Dataset& d) {
  const auto pilot =
      nodewise_lasso(d, default_nodewise_penalties(static_cast<int>(d.n()),
                                                   static_cast<int>(d.p())));
  const double theta_inf = inf_norm(pilot.theta);
  return theta_inf * std::sqrt(std::log(static_cast<double>(d.p())) /
                               static_cast<double>(d.n()));
}

void export_precision_csv(const PrecisionEstimate& e, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw DataError("cannot write " + path);
  for (std::size_t i = 0; i < e.theta.rows(); ++i) {
    for (std::size_t j = 0; j < e.theta.cols(); ++j)
      std::fprintf(f, j == 0 ? "%.17g" : ",%.17g", e.theta(i, j));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

void export_precision_diagnostics_json(const PrecisionEstimate& e,
                                       const std::string& path) {
  nlohmann::json j;
  j["method"] = precision_method_name(e.method);
  j["constraint_norm"] = e.constraint_norm;
  j["row_penalties"] = e.row_penalties;
  j["residual_scales"] = e.residual_scales;
  j["all_converged"] = e.all_converged;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace debayes
