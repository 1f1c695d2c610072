#pragma once

#include "debayes/dataset.hpp"
#include "debayes/lasso.hpp"

namespace debayes {

enum class PrecisionMethod { nodewise, clime, direct_inverse };

const char* precision_method_name(PrecisionMethod m);

struct PrecisionEstimate {
  Matrix theta;                  // p x p estimate of the precision matrix
  PrecisionMethod method = PrecisionMethod::nodewise;
  Vector row_penalties;          // lambda_j per row (kappa replicated for clime)
  Vector residual_scales;        // tau_j^2 per row (nodewise only)
  double constraint_norm = 0.0;  // || Theta G - I ||_max
  bool all_converged = true;     // any inner lasso non-convergence clears this
};

// One l1-penalized regression of each covariate on the others; rows are
// assembled as (1/tau_j^2) * (-theta_j with 1 at j).  The solver penalty is
// 2*lambda_j, the residual scale adds back +lambda_j * ||theta_j||_1, which
// is exactly what makes (Theta G)_jj = 1 and caps the off-diagonals at
// lambda_j / tau_j^2.
PrecisionEstimate nodewise_lasso(const Dataset& d, const Vector& penalties,
                                 int threads = 0);

// Rowwise l1 minimization under ||G theta - e_j||_inf <= kappa, solved as
// linear programs.  Symmetrization keeps the entry of smaller magnitude in
// each (i,j)/(j,i) pair.
PrecisionEstimate clime(const Dataset& d, double kappa, bool symmetrize = false,
                        int threads = 0);

// Plain inverse of the gram matrix; requires p < n and a condition number
// below 1e12.
PrecisionEstimate direct_inverse(const Dataset& d);

// Constant vector scale * sqrt(log(p)/n); default scale 1.
Vector default_nodewise_penalties(int n, int p, double scale = 1.0);

// kappa ~ ||Theta||_inf * sqrt(log p / n) with the infinity norm plugged in
// from a preliminary nodewise fit.
double default_clime_kappa(const Dataset& d);

void export_precision_csv(const PrecisionEstimate& e, const std::string& path);
void export_precision_diagnostics_json(const PrecisionEstimate& e, const std::string& path);

}  // namespace debayes
