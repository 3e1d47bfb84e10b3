#include "agdcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace agdcert {

namespace {

void require_same_size(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) throw ConfigError(std::string(what) + ": size mismatch");
}

}  // namespace

double dot(const Vec& a, const Vec& b) {
  require_same_size(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm1(const Vec& a) {
  double s = 0.0;
  for (double x : a) s += std::fabs(x);
  return s;
}

double norm_inf(const Vec& a) {
  double s = 0.0;
  for (double x : a) s = std::max(s, std::fabs(x));
  return s;
}

Vec add(const Vec& a, const Vec& b) {
  require_same_size(a, b, "add");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec sub(const Vec& a, const Vec& b) {
  require_same_size(a, b, "sub");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec scaled(const Vec& a, double s) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
  return r;
}

void axpy(double s, const Vec& x, Vec& y) {
  require_same_size(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

Vec Matrix::matvec(const Vec& x) const {
  if (int(x.size()) != cols_) throw ConfigError("matvec: size mismatch");
  Vec y(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double* r = row(i);
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vec Matrix::matvec_transpose(const Vec& y) const {
  if (int(y.size()) != rows_) throw ConfigError("matvec_transpose: size mismatch");
  Vec x(cols_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double* r = row(i);
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (int j = 0; j < cols_; ++j) x[j] += yi * r[j];
  }
  return x;
}

SymMatrix SymMatrix::identity(int order) {
  SymMatrix m(order);
  for (int i = 0; i < order; ++i) m.at(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::from_dense(const Matrix& m) {
  if (m.rows() != m.cols()) throw ConfigError("from_dense: matrix not square");
  SymMatrix s(m.rows());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i; j < m.cols(); ++j) s.at(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (int i = 0; i < n_; ++i) t += at(i, i);
  return t;
}

double SymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) {
    s += at(i, i) * at(i, i);
    for (int j = i + 1; j < n_; ++j) s += 2.0 * at(i, j) * at(i, j);
  }
  return std::sqrt(s);
}

Vec SymMatrix::matvec(const Vec& x) const {
  if (int(x.size()) != n_) throw ConfigError("sym matvec: size mismatch");
  Vec y(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += at(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Matrix SymMatrix::to_dense() const {
  Matrix m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = at(i, j);
  return m;
}

void SymMatrix::add_scaled(const SymMatrix& other, double s) {
  if (other.n_ != n_) throw ConfigError("add_scaled: order mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += s * other.a_[i];
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigensolver
// ---------------------------------------------------------------------------

namespace {

double off_diagonal_norm(const std::vector<double>& a, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double x = a[std::size_t(i) * n + j];
      s += 2.0 * x * x;
    }
  return std::sqrt(s);
}

}  // namespace

EigDecomposition sym_eig(const SymMatrix& a) {
  if (!a.finite()) throw ConfigError("sym_eig: non-finite input");
  const int n = a.order();
  EigDecomposition out;
  out.eigenvalues.assign(n, 0.0);
  out.vectors = Matrix(n, n);
  if (n == 0) return out;

  // Dense working copy; rotations update both triangles.
  std::vector<double> w(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w[std::size_t(i) * n + j] = a.at(i, j);
  std::vector<double> q(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) q[std::size_t(i) * n + i] = 1.0;

  const double full_norm = a.frobenius_norm();
  const double threshold = 1e-12 * full_norm;
  constexpr int kMaxSweeps = 100;

  double off = off_diagonal_norm(w, n);
  int sweep = 0;
  while (off > threshold && full_norm > 0.0) {
    if (++sweep > kMaxSweeps)
      throw NumericalError("sym_eig: no convergence after 100 sweeps, off-diagonal norm " +
                           fmt_double(off));
    for (int p = 0; p < n - 1; ++p) {
      for (int r = p + 1; r < n; ++r) {
        const double apq = w[std::size_t(p) * n + r];
        if (std::fabs(apq) <= 1e-3 * threshold / n) continue;
        const double app = w[std::size_t(p) * n + p];
        const double aqq = w[std::size_t(r) * n + r];
        const double theta = 0.5 * (aqq - app) / apq;
        // Smaller-magnitude root of t^2 + 2*theta*t - 1 = 0.
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        w[std::size_t(p) * n + p] = app - t * apq;
        w[std::size_t(r) * n + r] = aqq + t * apq;
        w[std::size_t(p) * n + r] = 0.0;
        w[std::size_t(r) * n + p] = 0.0;
        for (int j = 0; j < n; ++j) {
          if (j == p || j == r) continue;
          const double ajp = w[std::size_t(j) * n + p];
          const double ajq = w[std::size_t(j) * n + r];
          const double np = ajp - s * (ajq + tau * ajp);
          const double nq = ajq + s * (ajp - tau * ajq);
          w[std::size_t(j) * n + p] = np;
          w[std::size_t(p) * n + j] = np;
          w[std::size_t(j) * n + r] = nq;
          w[std::size_t(r) * n + j] = nq;
        }
        for (int j = 0; j < n; ++j) {
          const double qjp = q[std::size_t(j) * n + p];
          const double qjq = q[std::size_t(j) * n + r];
          q[std::size_t(j) * n + p] = qjp - s * (qjq + tau * qjp);
          q[std::size_t(j) * n + r] = qjq + s * (qjp - tau * qjq);
        }
      }
    }
    off = off_diagonal_norm(w, n);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return w[std::size_t(i) * n + i] < w[std::size_t(j) * n + j];
  });
  for (int k = 0; k < n; ++k) {
    const int src = order[k];
    out.eigenvalues[k] = w[std::size_t(src) * n + src];
    for (int i = 0; i < n; ++i) out.vectors(i, k) = q[std::size_t(i) * n + src];
  }
  return out;
}

SymMatrix psd_project(const SymMatrix& a) {
  const EigDecomposition eig = sym_eig(a);
  const int n = a.order();
  if (n == 0 || eig.eigenvalues.empty() || eig.eigenvalues.front() >= 0.0) return a;
  SymMatrix out(n);
  for (int k = 0; k < n; ++k) {
    const double lam = eig.eigenvalues[k];
    if (lam <= 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const double vi = eig.vectors(i, k) * lam;
      for (int j = i; j < n; ++j) out.at(i, j) += vi * eig.vectors(j, k);
    }
  }
  return out;
}

Vec svec(const SymMatrix& a) {
  static const double kSqrt2 = std::sqrt(2.0);
  const int n = a.order();
  Vec v;
  v.reserve(a.packed_size());
  for (int i = 0; i < n; ++i) {
    v.push_back(a.at(i, i));
    for (int j = i + 1; j < n; ++j) v.push_back(kSqrt2 * a.at(i, j));
  }
  return v;
}

SymMatrix smat(const Vec& v) {
  static const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
  // Invert len = n(n+1)/2.
  const std::size_t len = v.size();
  const int n = int((std::sqrt(8.0 * double(len) + 1.0) - 1.0) / 2.0 + 0.5);
  if (std::size_t(n) * (n + 1) / 2 != len)
    throw ConfigError("smat: length " + std::to_string(len) + " is not a triangular number");
  SymMatrix a(n);
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    a.at(i, i) = v[idx++];
    for (int j = i + 1; j < n; ++j) a.at(i, j) = kInvSqrt2 * v[idx++];
  }
  return a;
}

SpdFactor::SpdFactor(const SymMatrix& a) : n_(a.order()) {
  chol_.assign(std::size_t(n_) * n_, 0.0);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j) chol_[std::size_t(i) * n_ + j] = a.at(j, i);
  for (int j = 0; j < n_; ++j) {
    double d = chol_[std::size_t(j) * n_ + j];
    for (int k = 0; k < j; ++k) {
      const double l = chol_[std::size_t(j) * n_ + k];
      d -= l * l;
    }
    if (!(d > 0.0))
      throw NumericalError("solve_spd: matrix not positive definite (pivot " + fmt_double(d) +
                           " at index " + std::to_string(j) + ")");
    const double ljj = std::sqrt(d);
    chol_[std::size_t(j) * n_ + j] = ljj;
    for (int i = j + 1; i < n_; ++i) {
      double s = chol_[std::size_t(i) * n_ + j];
      const double* ri = chol_.data() + std::size_t(i) * n_;
      const double* rj = chol_.data() + std::size_t(j) * n_;
      for (int k = 0; k < j; ++k) s -= ri[k] * rj[k];
      chol_[std::size_t(i) * n_ + j] = s / ljj;
    }
  }
}

Vec SpdFactor::solve(const Vec& b) const {
  if (int(b.size()) != n_) throw ConfigError("solve_spd: rhs size mismatch");
  Vec y(b);
  for (int i = 0; i < n_; ++i) {
    const double* ri = chol_.data() + std::size_t(i) * n_;
    double s = y[i];
    for (int k = 0; k < i; ++k) s -= ri[k] * y[k];
    y[i] = s / ri[i];
  }
  for (int i = n_ - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n_; ++k) s -= chol_[std::size_t(k) * n_ + i] * y[k];
    y[i] = s / chol_[std::size_t(i) * n_ + i];
  }
  return y;
}

Vec solve_spd(const SymMatrix& a, const Vec& b) { return SpdFactor(a).solve(b); }

}  // namespace agdcert
