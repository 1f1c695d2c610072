#pragma once

#include <optional>

#include "debayes/matrix.hpp"

namespace debayes::linalg {

// Lower Cholesky factor of a symmetric positive definite matrix.
// Returns nullopt when a pivot drops below eps (matrix not PD).
std::optional<Matrix> cholesky(const Matrix& a, double eps = 0.0);

// Solve L z = b (forward) and L^T x = z (backward) for lower-triangular L.
Vector solve_lower(const Matrix& l, const Vector& b);
Vector solve_lower_transposed(const Matrix& l, const Vector& b);

// Solve A x = b for symmetric positive definite A via Cholesky.
Vector solve_spd(const Matrix& a, const Vector& b);

// Inverse of a symmetric positive definite matrix via Cholesky.
Matrix inverse_spd(const Matrix& a);

// 1-norm condition number kappa_1(A) = ||A||_1 ||A^{-1}||_1 (exact inverse,
// fine at the p <= few hundred scale this library targets).
double condition_number_1(const Matrix& a);

// Least squares through the normal equations; requires X^T X positive
// definite.  Used as oracle and for the OLS-collapse identities.
Vector ols(const Matrix& x, const Vector& y);

}  // namespace debayes::linalg
