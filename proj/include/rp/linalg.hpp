#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rp/errors.hpp"

namespace rp {

using Vec = std::vector<double>;

/// Dense row-major matrix of runtime shape. Dimensions in this library are
/// small (state/driver dimensions), so everything is plain loops.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return a_.empty(); }

  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  Mat& operator+=(const Mat& o) {
    assert(rows_ == o.rows_ && cols_ == o.cols_);
    for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    assert(rows_ == o.rows_ && cols_ == o.cols_);
    for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  Mat& operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
  }

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, double s) { return a *= s; }
  friend Mat operator*(double s, Mat a) { return a *= s; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

inline Vec operator+(Vec a, const Vec& b) {
  assert(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}
inline Vec operator-(Vec a, const Vec& b) {
  assert(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}
inline Vec operator*(double s, Vec a) {
  for (double& v : a) v *= s;
  return a;
}
inline void axpy(double s, const Vec& x, Vec& y) {
  assert(x.size() == y.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

inline double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }
inline double norm_inf(const Vec& a) {
  double m = 0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// outer(u, v)(i,j) = u_i v_j
inline Mat outer(const Vec& u, const Vec& v) {
  Mat m(static_cast<int>(u.size()), static_cast<int>(v.size()));
  for (size_t i = 0; i < u.size(); ++i)
    for (size_t j = 0; j < v.size(); ++j) m(static_cast<int>(i), static_cast<int>(j)) = u[i] * v[j];
  return m;
}

inline Vec matvec(const Mat& m, const Vec& x) {
  if (m.cols() != static_cast<int>(x.size())) throw DimensionError("matvec: shape mismatch");
  Vec y(static_cast<size_t>(m.rows()), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    double s = 0;
    for (int j = 0; j < m.cols(); ++j) s += m(i, j) * x[j];
    y[static_cast<size_t>(i)] = s;
  }
  return y;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: shape mismatch");
  Mat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Mat transpose(const Mat& m) {
  Mat t(m.cols(), m.rows());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

inline double frob_norm(const Mat& m) {
  double s = 0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}
inline double max_abs(const Mat& m) {
  double s = 0;
  for (double v : m.data()) s = std::max(s, std::abs(v));
  return s;
}

/// Spectral norm by power iteration on M^T M. Adequate for the small
/// matrices this library manipulates.
inline double op_norm(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Vec v(static_cast<size_t>(m.cols()), 1.0);
  double lam = 0;
  for (int it = 0; it < 100; ++it) {
    Vec w = matvec(m, v);
    Vec u = matvec(transpose(m), w);
    double n = norm2(u);
    if (n == 0) return 0.0;
    for (double& e : u) e /= n;
    double next = std::sqrt(n);
    if (std::abs(next - lam) <= 1e-14 * (1 + next)) {
      lam = next;
      break;
    }
    lam = next;
    v = std::move(u);
  }
  return lam;
}

/// Determinant via partial-pivot LU; n stays tiny here.
inline double det(Mat m) {
  if (m.rows() != m.cols()) throw DimensionError("det: square matrix required");
  const int n = m.rows();
  double d = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
    if (m(piv, k) == 0.0) return 0.0;
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m(piv, j), m(k, j));
      d = -d;
    }
    d *= m(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      for (int j = k; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return d;
}

/// Neumaier compensated accumulator; used for long germ sums.
class KahanSum {
 public:
  void add(double x) {
    double t = s_ + x;
    if (std::abs(s_) >= std::abs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0, c_ = 0;
};

}  // namespace rp
