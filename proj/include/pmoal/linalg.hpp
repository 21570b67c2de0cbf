#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pmoal {

using Vec = std::vector<double>;

/// Dense row-major matrix. Sized for the small problems in this library
/// (simplex dimensions and network layers); no attempt at blocking or SIMD.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n, double scale = 1.0) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Vec& data() { return data_; }
  const Vec& data() const { return data_; }

  Vec row(std::size_t r) const {
    return Vec(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
               data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
  }

  /// y = A x
  Vec matvec(const Vec& x) const {
    assert(x.size() == cols_);
    Vec y(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      const double* a = &data_[r * cols_];
      for (std::size_t c = 0; c < cols_; ++c) s += a[c] * x[c];
      y[r] = s;
    }
    return y;
  }

  /// y = A^T x
  Vec matvec_t(const Vec& x) const {
    assert(x.size() == rows_);
    Vec y(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      const double* a = &data_[r * cols_];
      const double xr = x[r];
      for (std::size_t c = 0; c < cols_; ++c) y[c] += a[c] * xr;
    }
    return y;
  }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vec data_;
};

inline double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::fabs(x));
  return m;
}

inline Vec sub(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

/// Invert a square matrix by Gauss-Jordan elimination with partial pivoting.
/// Throws on (numerically) singular input.
inline Matrix invert(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("invert: matrix not square");
  const std::size_t n = a.rows();
  Matrix w = a;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(w(r, col)) > std::fabs(w(piv, col))) piv = r;
    if (std::fabs(w(piv, col)) < 1e-12) throw std::runtime_error("invert: singular matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(w(piv, c), w(col, c));
        std::swap(inv(piv, c), inv(col, c));
      }
    }
    const double d = w(col, col);
    for (std::size_t c = 0; c < n; ++c) {
      w(col, c) /= d;
      inv(col, c) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = w(r, col);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        w(r, c) -= f * w(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
/// Returns eigenvalues (unsorted) and fills eigvecs columns to match.
inline Vec symmetric_eigen(Matrix a, Matrix* eigvecs = nullptr) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("symmetric_eigen: matrix not square");
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-28) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  Vec eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  if (eigvecs) *eigvecs = v;
  return eig;
}

/// Singular values of a general (small) matrix via the eigenvalues of A^T A
/// or A A^T, whichever is smaller.
inline Vec singular_values(const Matrix& a) {
  const std::size_t r = a.rows(), c = a.cols();
  const std::size_t n = std::min(r, c);
  Matrix g(n, n);
  if (c <= r) {
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < r; ++k) s += a(k, i) * a(k, j);
        g(i, j) = s;
      }
  } else {
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < c; ++k) s += a(i, k) * a(j, k);
        g(i, j) = s;
      }
  }
  Vec eig = symmetric_eigen(g);
  Vec sv(n);
  for (std::size_t i = 0; i < n; ++i) sv[i] = std::sqrt(std::max(0.0, eig[i]));
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

/// Number of singular values above the given threshold.
inline std::size_t numeric_rank(const Matrix& a, double sv_threshold) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Vec sv = singular_values(a);
  std::size_t r = 0;
  for (double s : sv)
    if (s > sv_threshold) ++r;
  return r;
}

/// Minimum-Euclidean-norm solution of T v = d, with the residual of the
/// attempt reported. Uses the eigendecomposition of T T^T (rows of T are
/// short here). Eigenvalues below rel_cut * max are treated as zero.
struct MinNormSolution {
  Vec v;
  double residual_inf = 0.0;
};

inline MinNormSolution min_norm_solve(const Matrix& t, const Vec& d,
                                      double rel_cut = 1e-12) {
  const std::size_t m = t.rows();
  assert(d.size() == m);
  Matrix g(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < t.cols(); ++k) s += t(i, k) * t(j, k);
      g(i, j) = s;
    }
  Matrix q;
  Vec eig = symmetric_eigen(g, &q);
  double emax = 0.0;
  for (double e : eig) emax = std::max(emax, std::fabs(e));
  const double cut = emax * rel_cut;
  // y = G^+ d = Q diag(1/eig) Q^T d over the non-null eigenspace
  Vec qtd(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += q(k, i) * d[k];
    qtd[i] = s;
  }
  Vec y(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      if (std::fabs(eig[k]) > cut) s += q(i, k) * qtd[k] / eig[k];
    y[i] = s;
  }
  MinNormSolution out;
  out.v = t.matvec_t(y);  // v = T^T y
  Vec tv = t.matvec(out.v);
  out.residual_inf = norm_inf(sub(tv, d));
  return out;
}

}  // namespace pmoal
