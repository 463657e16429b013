#pragma once

// Brute-force reference evaluations used by the tests. Everything here is plain
// triple loops over std::vector storage, independent of Eigen and of the
// library's prefix-tree evaluation.

#include <complex>
#include <cstddef>
#include <vector>

#include "histcheck/linalg.hpp"

namespace oracle {

using C = std::complex<double>;

struct Mat {
  std::size_t n = 0;
  std::vector<C> a;

  explicit Mat(std::size_t dim) : n(dim), a(dim * dim) {}
  C& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  C operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

inline Mat from(const histcheck::ComplexMatrix& m) {
  Mat out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out(i, j) = m(i, j);
  return out;
}

inline Mat identity(std::size_t n) {
  Mat out(n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

inline Mat mul(const Mat& x, const Mat& y) {
  Mat out(x.n);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = 0; j < x.n; ++j) {
      C s = 0.0;
      for (std::size_t l = 0; l < x.n; ++l) s += x(i, l) * y(l, j);
      out(i, j) = s;
    }
  return out;
}

inline Mat dagger(const Mat& x) {
  Mat out(x.n);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = 0; j < x.n; ++j) out(i, j) = std::conj(x(j, i));
  return out;
}

inline Mat power(const Mat& x, std::size_t k) {
  Mat out = identity(x.n);
  for (std::size_t i = 0; i < k; ++i) out = mul(out, x);
  return out;
}

inline C trace(const Mat& x) {
  C s = 0.0;
  for (std::size_t i = 0; i < x.n; ++i) s += x(i, i);
  return s;
}

inline double max_abs_diff(const Mat& x, const histcheck::ComplexMatrix& y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = 0; j < x.n; ++j) worst = std::max(worst, std::abs(x(i, j) - y(i, j)));
  return worst;
}

/// Class operator as the time-ordered product of Heisenberg projectors
/// (U^dagger^j P_{a_j} U^j), latest time leftmost.
inline Mat class_operator(const std::vector<std::size_t>& h, const Mat& u, const std::vector<Mat>& projectors) {
  Mat c = identity(u.n);
  const Mat u_dag = dagger(u);
  for (std::size_t j = 1; j <= h.size(); ++j) {
    const Mat heis = mul(mul(power(u_dag, j), projectors[h[j - 1]]), power(u, j));
    c = mul(heis, c);
  }
  return c;
}

/// Tr[C_a rho C_b^dagger].
inline C decoherence(const std::vector<std::size_t>& ha, const std::vector<std::size_t>& hb, const Mat& u,
                     const std::vector<Mat>& projectors, const Mat& rho) {
  const Mat ca = class_operator(ha, u, projectors);
  const Mat cb = class_operator(hb, u, projectors);
  return trace(mul(mul(ca, rho), dagger(cb)));
}

}  // namespace oracle
