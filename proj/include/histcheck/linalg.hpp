#pragma once

// Dense complex linear algebra for small Hilbert spaces (d <= ~16).
//
// ComplexMatrix is a thin value type over a row-major Eigen matrix. It only
// ever holds square matrices; the free functions below are the vocabulary the
// rest of the library is written in.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>

#include <Eigen/Dense>

#include "histcheck/errors.hpp"

namespace histcheck {

using Complex = std::complex<double>;
using Rng = std::mt19937_64;

/// Default tolerance for every validation predicate.
inline constexpr double kDefaultTol = 1e-10;

class ComplexMatrix {
 public:
  using Storage = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  /// Zero matrix of the given dimension.
  explicit ComplexMatrix(std::size_t dim) : data_(Storage::Zero(checked_dim(dim), checked_dim(dim))) {}

  /// Wraps an Eigen matrix; rejects non-square, empty or non-finite input.
  explicit ComplexMatrix(Storage data) : data_(std::move(data)) {
    if (data_.rows() != data_.cols()) {
      throw InvalidArgument("matrix must be square, got " + std::to_string(data_.rows()) + "x" +
                            std::to_string(data_.cols()));
    }
    if (data_.rows() == 0) throw InvalidArgument("matrix dimension must be >= 1");
    if (!is_finite()) throw InvalidArgument("matrix has non-finite entries");
  }

  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
      : ComplexMatrix(from_rows(rows)) {}

  static ComplexMatrix identity(std::size_t dim) {
    return ComplexMatrix(Storage(Storage::Identity(checked_dim(dim), checked_dim(dim))));
  }

  static ComplexMatrix diagonal(std::initializer_list<Complex> diag) {
    ComplexMatrix out(diag.size());
    std::size_t i = 0;
    for (const auto& v : diag) {
      out(i, i) = v;
      ++i;
    }
    return out;
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.rows()); }

  Complex operator()(std::size_t i, std::size_t j) const { return data_(i, j); }
  Complex& operator()(std::size_t i, std::size_t j) { return data_(i, j); }

  const Storage& eigen() const noexcept { return data_; }

  bool is_finite() const { return data_.allFinite(); }

  ComplexMatrix& operator+=(const ComplexMatrix& rhs) {
    require_same_dim(rhs);
    data_ += rhs.data_;
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& rhs) {
    require_same_dim(rhs);
    data_ -= rhs.data_;
    return *this;
  }
  ComplexMatrix& operator*=(Complex s) {
    data_ *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
  friend ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
  friend ComplexMatrix operator*(ComplexMatrix lhs, Complex s) { return lhs *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix rhs) { return rhs *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
    lhs.require_same_dim(rhs);
    return ComplexMatrix(Unchecked{}, lhs.data_ * rhs.data_);
  }

  friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a.dim() == b.dim() && a.data_ == b.data_;
  }

  /// Builds a matrix from an already-validated Eigen expression without rechecking.
  struct Unchecked {};
  ComplexMatrix(Unchecked, Storage data) : data_(std::move(data)) {}

 private:
  static Eigen::Index checked_dim(std::size_t dim) {
    if (dim == 0) throw InvalidArgument("matrix dimension must be >= 1");
    return static_cast<Eigen::Index>(dim);
  }

  static Storage from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Storage s(n, n);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
      if (static_cast<Eigen::Index>(row.size()) != n) {
        throw InvalidArgument("matrix must be square");
      }
      Eigen::Index j = 0;
      for (const auto& v : row) s(i, j++) = v;
      ++i;
    }
    return s;
  }

  void require_same_dim(const ComplexMatrix& rhs) const {
    if (dim() != rhs.dim()) throw DimensionMismatch(dim(), rhs.dim());
  }

  Storage data_;
};

inline ComplexMatrix mat_mul(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b; }

/// Conjugate transpose.
inline ComplexMatrix adjoint(const ComplexMatrix& a) {
  return ComplexMatrix(ComplexMatrix::Unchecked{}, a.eigen().adjoint());
}

inline Complex trace(const ComplexMatrix& a) { return a.eigen().trace(); }

/// Hilbert-Schmidt norm sqrt(Tr[A^dagger A]).
inline double hs_norm(const ComplexMatrix& a) { return a.eigen().norm(); }

/// Tr[A^dagger B].
inline Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim());
  return a.eigen().conjugate().cwiseProduct(b.eigen()).sum();
}

/// AB - BA.
inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

inline bool is_hermitian(const ComplexMatrix& a, double tol = kDefaultTol) {
  return hs_norm(a - adjoint(a)) <= tol;
}

inline bool is_unitary(const ComplexMatrix& u, double tol = kDefaultTol) {
  return hs_norm(adjoint(u) * u - ComplexMatrix::identity(u.dim())) <= tol;
}

inline bool is_projector(const ComplexMatrix& p, double tol = kDefaultTol) {
  return is_hermitian(p, tol) && hs_norm(p * p - p) <= tol;
}

/// U^n by repeated multiplication; n = 0 gives the identity.
inline ComplexMatrix matrix_power(const ComplexMatrix& u, std::size_t n) {
  auto out = ComplexMatrix::identity(u.dim());
  for (std::size_t i = 0; i < n; ++i) out = u * out;
  return out;
}

/// d x d matrix of i.i.d. standard complex Gaussians (real and imaginary parts N(0,1)).
inline ComplexMatrix complex_gaussian(std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = {re, im};
    }
  }
  return g;
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases of
/// diag(R) absorbed into Q, so the result is exactly Haar rather than merely unitary.
inline ComplexMatrix haar_random_unitary(std::size_t d, Rng& rng) {
  const auto g = complex_gaussian(d, rng);
  Eigen::HouseholderQR<ComplexMatrix::Storage> qr(g.eigen());
  ComplexMatrix::Storage q = qr.householderQ();
  const ComplexMatrix::Storage& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    const Complex phase = mag > 0.0 ? rjj / mag : Complex{1.0, 0.0};
    q.col(j) *= phase;
  }
  return ComplexMatrix(ComplexMatrix::Unchecked{}, std::move(q));
}

inline ComplexMatrix haar_random_unitary(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return haar_random_unitary(d, rng);
}

/// 2x2 Hadamard gate.
inline ComplexMatrix hadamard() {
  const double s = 1.0 / std::sqrt(2.0);
  return ComplexMatrix{{s, s}, {s, -s}};
}

}  // namespace histcheck
