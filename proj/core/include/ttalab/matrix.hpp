#pragma once

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ttalab {

// Dense row-major matrix of doubles. Deliberately minimal: the model and the
// adapters need batched affine maps and a handful of elementwise passes, all
// of which the three multiply kernels below cover.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), d_(static_cast<std::size_t>(rows) * cols, 0.0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimension");
  }

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return d_.size(); }

  double& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return d_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return d_[static_cast<std::size_t>(r) * cols_ + c];
  }

  double* row(int r) { return d_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const { return d_.data() + static_cast<std::size_t>(r) * cols_; }

  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  void fill(double v) { d_.assign(d_.size(), v); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> d_;
};

// out = a * b. Accumulates over a's columns; out must be preallocated.
inline void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols() == b.rows() && out.rows() == a.rows() && out.cols() == b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  out.fill(0.0);
  for (int i = 0; i < n; ++i) {
    double* oi = out.row(i);
    const double* ai = a.row(i);
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b.row(p);
      for (int j = 0; j < m; ++j) oi[j] += av * bp[j];
    }
  }
}

// out = a * b^T. Row-by-row dot products.
inline void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols() == b.cols() && out.rows() == a.rows() && out.cols() == b.rows());
  const int n = a.rows(), k = a.cols(), m = b.rows();
  for (int i = 0; i < n; ++i) {
    const double* ai = a.row(i);
    double* oi = out.row(i);
    for (int j = 0; j < m; ++j) {
      const double* bj = b.row(j);
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      oi[j] = acc;
    }
  }
}

// out = a^T * b. Same loop structure as matmul with a's roles swapped.
inline void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.rows() == b.rows() && out.rows() == a.cols() && out.cols() == b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  out.fill(0.0);
  for (int i = 0; i < n; ++i) {
    const double* ai = a.row(i);
    const double* bi = b.row(i);
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      double* op = out.row(p);
      for (int j = 0; j < m; ++j) op[j] += av * bi[j];
    }
  }
}

}  // namespace ttalab
