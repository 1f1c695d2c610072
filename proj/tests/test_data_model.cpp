#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "debayes/dataset.hpp"
#include "debayes/errors.hpp"
#include "debayes/rng.hpp"

using namespace debayes;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("load_csv parses a simple file") {
  const auto path = write_temp("dm_basic.csv", "y,x1\n1,1\n2,2\n3,3\n");
  const Dataset d = load_csv(path, "y", false);
  CHECK(d.n() == 3);
  CHECK(d.p() == 1);
  CHECK(d.design()(0, 0) == 1.0);
  CHECK(d.response()[2] == 3.0);
  CHECK(d.column_names()[0] == "x1");
}

TEST_CASE("standardize centers and scales by the sample sd") {
  const auto path = write_temp("dm_std.csv", "y,x1\n1,1\n2,2\n3,3\n");
  const Dataset d = load_csv(path, "y", true);
  // sample sd of (1,2,3) is 1, so the column becomes (-1, 0, 1)
  CHECK(d.design()(0, 0) == doctest::Approx(-1.0));
  CHECK(d.design()(1, 0) == doctest::Approx(0.0));
  CHECK(d.design()(2, 0) == doctest::Approx(1.0));
  REQUIRE(d.standardization().has_value());
  CHECK(d.standardization()->center[0] == doctest::Approx(2.0));
  CHECK(d.standardization()->scale[0] == doctest::Approx(1.0));
}

TEST_CASE("non-numeric cell names row and column") {
  const auto path = write_temp("dm_bad.csv", "y,x1\n1,1\nabc,2\n");
  try {
    load_csv(path, "y", false);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("abc") != std::string::npos);
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("'y'") != std::string::npos);
  }
}

TEST_CASE("error paths: missing file, ragged rows, absent response, zero variance") {
  CHECK_THROWS_AS(load_csv("/nonexistent/nope.csv", "y", false), DataError);
  const auto ragged = write_temp("dm_ragged.csv", "y,x1\n1,2\n3\n");
  CHECK_THROWS_AS(load_csv(ragged, "y", false), DataError);
  const auto ok = write_temp("dm_resp.csv", "y,x1\n1,2\n3,4\n");
  CHECK_THROWS_AS(load_csv(ok, "zz", false), DataError);
  const auto zerovar = write_temp("dm_zv.csv", "y,x1\n1,2\n3,2\n");
  CHECK_THROWS_AS(load_csv(zerovar, "y", true), DataError);
  CHECK_NOTHROW(load_csv(zerovar, "y", false));
}

TEST_CASE("response column can be selected by index") {
  const auto path = write_temp("dm_idx.csv", "a,b\n1,10\n2,20\n");
  const Dataset d = load_csv(path, "1", false);
  CHECK(d.response()[0] == 10.0);
  CHECK(d.design()(0, 0) == 1.0);
}

TEST_CASE("dataset invariants are enforced") {
  CHECK_THROWS_AS(Dataset(Matrix(1, 2), Vector{1.0}), DataError);  // n < 2
  Matrix bad(2, 1);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(Dataset(std::move(bad), Vector{1.0, 2.0}), DataError);
  CHECK_THROWS_AS(Dataset(Matrix(3, 1), Vector{1.0, 2.0}), DataError);  // length mismatch
}

TEST_CASE("gram matrix on known inputs") {
  // identity rows stacked: Omega = diag(0.5, 0.5)
  Matrix x(2, 2);
  x(0, 0) = 1.0;
  x(1, 1) = 1.0;
  const Dataset d(std::move(x), Vector{0.0, 0.0});
  const Matrix g = gram_matrix(d);
  CHECK(g(0, 0) == doctest::Approx(0.5));
  CHECK(g(1, 1) == doctest::Approx(0.5));
  CHECK(g(0, 1) == 0.0);

  // all-ones column, n = 4: Omega = [[1]]
  Matrix ones(4, 1, 1.0);
  const Dataset d2(std::move(ones), Vector(4, 0.0));
  CHECK(gram_matrix(d2)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("gram matrix equals the brute-force double loop") {
  rng::Stream s(11, 0);
  Matrix x(5, 3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = s.next_normal();
  const Dataset d(x, Vector(5, 0.0));
  const Matrix g = gram_matrix(d);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < 5; ++i) acc += x(i, a) * x(i, b);
      CHECK(std::fabs(g(a, b) - acc / 5.0) < 1e-12);
    }
}

TEST_CASE("gram matrix is symmetric and positive semidefinite") {
  rng::Stream s(13, 0);
  Matrix x(20, 6);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 6; ++j) x(i, j) = s.next_normal();
  const Dataset d(std::move(x), Vector(20, 0.0));
  const Matrix g = gram_matrix(d);
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) CHECK(g(a, b) == g(b, a));
  for (int probe = 0; probe < 100; ++probe) {
    Vector v(6);
    for (auto& c : v) c = s.next_normal();
    const Vector gv = matvec(g, v);
    double quad = 0.0;
    for (std::size_t j = 0; j < 6; ++j) quad += v[j] * gv[j];
    CHECK(quad >= -1e-12);
  }
}

TEST_CASE("csv round-trips bit-exactly without standardization") {
  rng::Stream s(17, 0);
  Matrix x(8, 3);
  Vector y(8);
  for (std::size_t i = 0; i < 8; ++i) {
    y[i] = s.next_normal() * 1e3;
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = s.next_normal() / 7.0;
  }
  const Dataset d(x, y);
  const auto path = (std::filesystem::temp_directory_path() / "dm_rt.csv").string();
  export_csv(d, path);
  const Dataset back = load_csv(path, "y", false);
  REQUIRE(back.n() == d.n());
  REQUIRE(back.p() == d.p());
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(back.response()[i] == y[i]);
    for (std::size_t j = 0; j < 3; ++j) CHECK(back.design()(i, j) == x(i, j));
  }
}
