#include "debayes/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace debayes::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Isa resolve_isa() {
  const char* force = std::getenv("DEBAYES_SIMD");
  if (force != nullptr) {
    if (std::strcmp(force, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(force, "avx2") == 0 && avx2_supported()) return Isa::avx2;
    // "auto" or anything unrecognized falls through to detection
  }
  return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

const Isa g_isa = resolve_isa();

}  // namespace

Isa active_isa() { return g_isa; }

const char* isa_name(Isa isa) {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
  return g_isa == Isa::avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

double sum(const double* a, std::size_t n) {
  return g_isa == Isa::avx2 ? avx2::sum(a, n) : scalar::sum(a, n);
}

double sum_sq(const double* a, std::size_t n) {
  return g_isa == Isa::avx2 ? avx2::sum_sq(a, n) : scalar::sum_sq(a, n);
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
  g_isa == Isa::avx2 ? avx2::axpy(y, alpha, x, n) : scalar::axpy(y, alpha, x, n);
}

void weighted_residual(double* out, const double* w, const double* y,
                       const double* yhat, std::size_t n) {
  g_isa == Isa::avx2 ? avx2::weighted_residual(out, w, y, yhat, n)
                     : scalar::weighted_residual(out, w, y, yhat, n);
}

}  // namespace debayes::kernels
