#pragma once

#include <cstdint>
#include <optional>

#include "debayes/dataset.hpp"

namespace debayes {

struct LassoConfig {
  double penalty = 0.0;          // rho on the l1 term
  int max_iterations = 10000;    // full coordinate sweeps
  double tolerance = 1e-8;       // max abs coefficient change per sweep
  std::optional<Vector> warm_start;
};

struct LassoFit {
  Vector coefficients;
  double objective = 0.0;        // (1/n)||y - Xb||^2 + penalty * ||b||_1
  int iterations_used = 0;
  bool converged = false;
  Vector objective_trace;        // objective after each sweep
};

// Cyclic coordinate descent on (1/n)||y - Xb||^2 + rho ||b||_1.
LassoFit fit_lasso(const Dataset& d, const LassoConfig& cfg);

// Covariance-form core: minimizes y_sq_mean - 2 z'b + b'Gb + rho||b||_1
// where G = X'X/n and z = X'y/n.  Shared with the nodewise regressions,
// which pull G and z out of one full gram matrix.
LassoFit lasso_covariance(const Matrix& gram, const Vector& crossprod,
                          double y_sq_mean, const LassoConfig& cfg);

// rho = scale * sqrt(log(p) / n); the artifact default is scale = 2.
// p = 1 gives 0 -- callers must guard.
double default_penalty(int n, int p, double scale = 2.0);

// K-fold cross-validation over a log-spaced penalty grid; returns the
// minimizing penalty.  Fold assignment is a deterministic shuffle under
// the seed.
double cv_penalty(const Dataset& d, std::uint64_t seed, int folds = 10,
                  int grid_size = 50);

}  // namespace debayes
