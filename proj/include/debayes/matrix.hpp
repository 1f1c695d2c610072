#pragma once

#include <cstddef>
#include <vector>

#include "debayes/kernels.hpp"

namespace debayes {

// Dense row-major matrix of doubles.  Row-major by observation is the layout
// every inner loop assumes: a row is a contiguous span usable by the kernels.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

using Vector = std::vector<double>;

// out = A x
inline Vector matvec(const Matrix& a, const Vector& x) {
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    out[i] = kernels::dot(a.row(i), x.data(), a.cols());
  return out;
}

// out = A^T x, accumulated row-wise so the row-major layout stays streaming
inline Vector matvec_transposed(const Matrix& a, const Vector& x) {
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    kernels::axpy(out.data(), x[i], a.row(i), a.cols());
  return out;
}

double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
// ||A||_inf: max row l1 norm
double inf_norm(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

}  // namespace debayes
