#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace blowup {

// Small dense row-major matrix, enough for the <= 10x10 systems here.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> v;

  Matrix() = default;
  explicit Matrix(std::size_t n_) : n(n_), v(n_ * n_, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return v[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * n + j]; }

  Matrix transpose() const {
    Matrix t(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
  Matrix sym() const {
    Matrix s(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
    return s;
  }
  double max_asymmetry() const {
    double m = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    return m;
  }
};

inline Matrix operator+(Matrix a, const Matrix& b) {
  for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
  return a;
}
inline Matrix operator*(double s, Matrix a) {
  for (auto& x : a.v) x *= s;
  return a;
}

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
// tol (relative to the matrix norm). Returns ascending eigenvalues.
inline std::vector<double> jacobi_eigenvalues(Matrix a, double tol = 1e-13, int max_sweeps = 100) {
  const std::size_t n = a.n;
  double fro = 0;
  for (double x : a.v) fro += x * x;
  fro = std::sqrt(fro);
  auto off = [&] {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  for (int sweep = 0; sweep < max_sweeps && off() > tol * std::max(fro, 1.0); ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
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
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Determinant by Gaussian elimination with partial pivoting.
inline double determinant(Matrix a) {
  const std::size_t n = a.n;
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (a(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(c, k), a(piv, k));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = a(r, c) / a(c, c);
      for (std::size_t k = c; k < n; ++k) a(r, k) -= m * a(c, k);
    }
  }
  return det;
}

// D_1 .. D_n
inline std::vector<double> leading_minors(const Matrix& a) {
  std::vector<double> d;
  for (std::size_t l = 1; l <= a.n; ++l) {
    Matrix s(l);
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < l; ++j) s(i, j) = a(i, j);
    d.push_back(determinant(s));
  }
  return d;
}

// Composite Simpson on a uniform grid; an odd interval count closes with 3/8.
inline double simpson_uniform(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (y[0] + y[1]);
  if (n == 3) return h / 3.0 * (y[0] + 4 * y[1] + y[2]);
  std::size_t m = n - 1;  // intervals
  double s = 0;
  std::size_t end = m;
  if (m % 2 == 1) {
    end = m - 3;
    s += 3.0 * h / 8.0 * (y[end] + 3 * y[end + 1] + 3 * y[end + 2] + y[end + 3]);
  }
  for (std::size_t i = 0; i + 2 <= end; i += 2) s += h / 3.0 * (y[i] + 4 * y[i + 1] + y[i + 2]);
  return s;
}

// Running trapezoid integral, I[0] = 0.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> I(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) I[i] = I[i - 1] + 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return I;
}

// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Piecewise-linear lookup on an increasing grid; clamps outside.
inline double interp_linear(const std::vector<double>& x, const std::vector<double>& y, double q) {
  if (q <= x.front()) return y.front();
  if (q >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), q);
  const std::size_t i = std::size_t(it - x.begin()) - 1;
  const double w = (q - x[i]) / (x[i + 1] - x[i]);
  return (1 - w) * y[i] + w * y[i + 1];
}

}  // namespace blowup
