#pragma once

#include <cstddef>

// Dense vector kernels used by the hot loops (coordinate descent sweeps,
// per-draw debias corrections, gram/matvec assembly).  Scalar reference
// implementations always exist; an AVX2+FMA variant is selected at runtime
// when the CPU supports it.  DEBAYES_SIMD=scalar|avx2|auto forces a lane.

namespace debayes::kernels {

enum class Isa { scalar, avx2 };

// Lane resolved on first use; sticky for the lifetime of the process.
Isa active_isa();
const char* isa_name(Isa isa);
bool avx2_supported();

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
// y += alpha * x
void axpy(double* y, double alpha, const double* x, std::size_t n);
// out[i] = w[i] * (y[i] - yhat[i])
void weighted_residual(double* out, const double* w, const double* y,
                       const double* yhat, std::size_t n);

// Reference lane, always available.  Exposed so equivalence tests can pin
// the dispatched lane against it.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
void axpy(double* y, double alpha, const double* x, std::size_t n);
void weighted_residual(double* out, const double* w, const double* y,
                       const double* yhat, std::size_t n);
}  // namespace scalar

// AVX2 lane.  Callable only when avx2_supported() is true; on other
// hardware these symbols exist but forward to the scalar lane.
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
void axpy(double* y, double alpha, const double* x, std::size_t n);
void weighted_residual(double* out, const double* w, const double* y,
                       const double* yhat, std::size_t n);
}  // namespace avx2

}  // namespace debayes::kernels
