#pragma once

#include "debayes/matrix.hpp"

namespace debayes::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
  Vector x;
  double objective = 0.0;
  Status status = Status::optimal;
};

// Minimize c'x subject to A x <= b, x >= 0 (b may have negative entries).
// Dense two-phase primal simplex; Bland's rule kicks in after a stall to
// rule out cycling.  Sized for the p <= few hundred rowwise programs the
// precision estimators generate.
Result solve(const Matrix& a, const Vector& b, const Vector& c,
             int max_iterations = 0);

}  // namespace debayes::lp
