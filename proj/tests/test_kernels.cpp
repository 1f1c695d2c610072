#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "debayes/kernels.hpp"
#include "debayes/rng.hpp"

using namespace debayes;

namespace {

std::vector<double> random_vec(std::size_t n, rng::Stream& s, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * s.next_normal();
  return v;
}

}  // namespace

TEST_CASE("scalar and avx2 lanes agree on every kernel") {
  rng::Stream s(42, rng::stream_id(rng::Domain::generic, 0));
  // odd lengths exercise the tail paths
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 17u, 64u, 100u, 257u, 1000u}) {
    const auto a = random_vec(n, s);
    const auto b = random_vec(n, s, 3.0);
    const double tol = 1e-13 * (static_cast<double>(n) + 1.0);

    CHECK(kernels::scalar::dot(a.data(), b.data(), n) ==
          doctest::Approx(kernels::avx2::dot(a.data(), b.data(), n)).epsilon(tol));
    CHECK(kernels::scalar::sum(a.data(), n) ==
          doctest::Approx(kernels::avx2::sum(a.data(), n)).epsilon(tol));
    CHECK(kernels::scalar::sum_sq(a.data(), n) ==
          doctest::Approx(kernels::avx2::sum_sq(a.data(), n)).epsilon(tol));

    auto y1 = random_vec(n, s);
    auto y2 = y1;
    kernels::scalar::axpy(y1.data(), 1.7, a.data(), n);
    kernels::avx2::axpy(y2.data(), 1.7, a.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

    std::vector<double> o1(n), o2(n);
    kernels::scalar::weighted_residual(o1.data(), a.data(), b.data(), y1.data(), n);
    kernels::avx2::weighted_residual(o2.data(), a.data(), b.data(), y1.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == o2[i]);
  }
}

TEST_CASE("dispatched kernels match the reference lane") {
  rng::Stream s(7, rng::stream_id(rng::Domain::generic, 1));
  const auto a = random_vec(129, s);
  const auto b = random_vec(129, s);
  CHECK(kernels::dot(a.data(), b.data(), 129) ==
        doctest::Approx(kernels::scalar::dot(a.data(), b.data(), 129)).epsilon(1e-12));
  INFO("active lane: ", kernels::isa_name(kernels::active_isa()));
  if (kernels::avx2_supported()) CHECK(kernels::active_isa() == kernels::Isa::avx2);
}

TEST_CASE("kernel identities") {
  rng::Stream s(3, rng::stream_id(rng::Domain::generic, 2));
  const auto a = random_vec(57, s);
  // sum_sq(a) == dot(a, a)
  CHECK(kernels::sum_sq(a.data(), 57) ==
        doctest::Approx(kernels::dot(a.data(), a.data(), 57)).epsilon(1e-14));
  // axpy with alpha 0 is a no-op
  auto y = random_vec(57, s);
  const auto y_before = y;
  kernels::axpy(y.data(), 0.0, a.data(), 57);
  CHECK(y == y_before);
}
