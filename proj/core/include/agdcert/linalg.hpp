#pragma once

#include <cstddef>
#include <vector>

#include "agdcert/util.hpp"

namespace agdcert {

// ---------------------------------------------------------------------------
// Vector helpers (Vec = std::vector<double>)
// ---------------------------------------------------------------------------

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm1(const Vec& a);
double norm_inf(const Vec& a);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scaled(const Vec& a, double s);
// y += s * x
void axpy(double s, const Vec& x, Vec& y);

// Dense row-major matrix, also used for eigenvector sets (one eigenvector per
// column) and equality-constraint blocks.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }
  const double* row(int i) const { return a_.data() + std::size_t(i) * cols_; }
  double* row(int i) { return a_.data() + std::size_t(i) * cols_; }
  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  Vec matvec(const Vec& x) const;
  Vec matvec_transpose(const Vec& y) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

// ---------------------------------------------------------------------------
// Symmetric matrices, packed upper triangle (row-wise)
// ---------------------------------------------------------------------------

class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int order)
      : n_(order), a_(std::size_t(order) * (order + 1) / 2, 0.0) {}

  static SymMatrix identity(int order);
  // Symmetrizes (averages) a full dense row-major square matrix.
  static SymMatrix from_dense(const Matrix& m);

  int order() const { return n_; }
  std::size_t packed_size() const { return a_.size(); }

  double& at(int i, int j) { return a_[packed_index(i, j)]; }
  double at(int i, int j) const { return a_[packed_index(i, j)]; }

  const std::vector<double>& packed() const { return a_; }
  std::vector<double>& packed() { return a_; }

  double trace() const;
  double frobenius_norm() const;
  Vec matvec(const Vec& x) const;
  Matrix to_dense() const;

  void add_scaled(const SymMatrix& other, double s);
  bool finite() const { return all_finite(a_); }

 private:
  std::size_t packed_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::size_t(i) * n_ - std::size_t(i) * (i - 1) / 2 + (j - i);
  }

  int n_ = 0;
  std::vector<double> a_;
};

struct EigDecomposition {
  Vec eigenvalues;  // ascending
  Matrix vectors;   // orthonormal, one eigenvector per column
};

// Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
// Converges when the off-diagonal Frobenius norm drops below
// 1e-12 * ||A||_F; throws NumericalError after 100 sweeps.
EigDecomposition sym_eig(const SymMatrix& a);

// Nearest positive semidefinite matrix in Frobenius norm: negative
// eigenvalues clipped to zero. PSD inputs are returned unchanged.
SymMatrix psd_project(const SymMatrix& a);

// Isometric symmetric vectorization: off-diagonal entries scaled by sqrt(2)
// so that dot(svec(A), svec(B)) == trace(A*B). Ordering follows the packed
// upper triangle (row-wise).
Vec svec(const SymMatrix& a);
SymMatrix smat(const Vec& v);

// Cached Cholesky factorization of a symmetric positive definite matrix.
class SpdFactor {
 public:
  explicit SpdFactor(const SymMatrix& a);
  Vec solve(const Vec& b) const;
  int order() const { return n_; }

 private:
  int n_ = 0;
  std::vector<double> chol_;  // lower triangle of L, row-major dense
};

Vec solve_spd(const SymMatrix& a, const Vec& b);

}  // namespace agdcert
