#pragma once

// Projective partitions {P_mu} of a finite-dimensional Hilbert space and the
// state sets built from them: all density operators, the partition states
// P_nu / Tr P_nu, and the states that are block-diagonal in the partition.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>

#include "histcheck/errors.hpp"
#include "histcheck/linalg.hpp"

namespace histcheck {

/// Raised by validate_partition; names the first violated invariant.
class PartitionError : public Error {
 public:
  enum class Kind { Empty, DimensionMismatch, NotAProjector, BadRank, NotOrthogonal, NotComplete };

  PartitionError(Kind kind, std::size_t first, std::size_t second, double residual, const std::string& what)
      : Error(what), kind_(kind), first_(first), second_(second), residual_(residual) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t first() const noexcept { return first_; }
  std::size_t second() const noexcept { return second_; }
  double residual() const noexcept { return residual_; }

 private:
  Kind kind_;
  std::size_t first_;
  std::size_t second_;
  double residual_;
};

inline const char* to_string(PartitionError::Kind kind) {
  switch (kind) {
    case PartitionError::Kind::Empty: return "Empty";
    case PartitionError::Kind::DimensionMismatch: return "DimensionMismatch";
    case PartitionError::Kind::NotAProjector: return "NotAProjector";
    case PartitionError::Kind::BadRank: return "BadRank";
    case PartitionError::Kind::NotOrthogonal: return "NotOrthogonal";
    case PartitionError::Kind::NotComplete: return "NotComplete";
  }
  return "Unknown";
}

class ProjectivePartition;
ProjectivePartition validate_partition(std::vector<ComplexMatrix> projectors, double tol);

/// Ordered list of mutually orthogonal projectors summing to the identity.
/// Only obtainable through validate_partition (or the constructors built on it).
/// History indices refer to the order stored here.
class ProjectivePartition {
 public:
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return projectors_.size(); }
  const ComplexMatrix& operator[](std::size_t mu) const { return projectors_.at(mu); }
  const std::vector<ComplexMatrix>& projectors() const noexcept { return projectors_; }
  const std::vector<std::size_t>& ranks() const noexcept { return ranks_; }

 private:
  friend ProjectivePartition validate_partition(std::vector<ComplexMatrix>, double);

  ProjectivePartition(std::size_t dim, std::vector<ComplexMatrix> projectors, std::vector<std::size_t> ranks)
      : dim_(dim), projectors_(std::move(projectors)), ranks_(std::move(ranks)) {}

  std::size_t dim_;
  std::vector<ComplexMatrix> projectors_;
  std::vector<std::size_t> ranks_;
};

inline ProjectivePartition validate_partition(std::vector<ComplexMatrix> projectors, double tol = kDefaultTol) {
  using Kind = PartitionError::Kind;
  if (projectors.empty()) throw PartitionError(Kind::Empty, 0, 0, 0.0, "partition has no projectors");
  const std::size_t d = projectors.front().dim();
  for (std::size_t mu = 0; mu < projectors.size(); ++mu) {
    if (projectors[mu].dim() != d) {
      throw PartitionError(Kind::DimensionMismatch, mu, 0, 0.0,
                           "projector " + std::to_string(mu) + " has dimension " +
                               std::to_string(projectors[mu].dim()) + ", expected " + std::to_string(d));
    }
  }

  std::vector<std::size_t> ranks;
  ranks.reserve(projectors.size());
  for (std::size_t mu = 0; mu < projectors.size(); ++mu) {
    const auto& p = projectors[mu];
    if (!is_projector(p, tol)) {
      const double residual = std::max(hs_norm(p - adjoint(p)), hs_norm(p * p - p));
      throw PartitionError(Kind::NotAProjector, mu, mu, residual,
                           "NotAProjector(" + std::to_string(mu) + ")");
    }
    const double tr = trace(p).real();
    const double rounded = std::round(tr);
    if (std::abs(tr - rounded) > tol || rounded < 1.0) {
      throw PartitionError(Kind::BadRank, mu, mu, std::abs(tr - rounded),
                           "projector " + std::to_string(mu) + " has non-integral or zero trace " +
                               std::to_string(tr));
    }
    ranks.push_back(static_cast<std::size_t>(rounded));
  }

  for (std::size_t a = 0; a < projectors.size(); ++a) {
    for (std::size_t b = a + 1; b < projectors.size(); ++b) {
      const double overlap = hs_norm(projectors[a] * projectors[b]);
      if (overlap > tol) {
        throw PartitionError(Kind::NotOrthogonal, a, b, overlap,
                             "NotOrthogonal(" + std::to_string(a) + ", " + std::to_string(b) + ")");
      }
    }
  }

  ComplexMatrix sum(d);
  for (const auto& p : projectors) sum += p;
  const double residual = hs_norm(sum - ComplexMatrix::identity(d));
  if (residual > tol) {
    throw PartitionError(Kind::NotComplete, 0, 0, residual,
                         "NotComplete(residual " + std::to_string(residual) + ")");
  }

  return ProjectivePartition(d, std::move(projectors), std::move(ranks));
}

/// Computational-basis partition: projector mu is the sum of |i><i| over group mu.
inline ProjectivePartition partition_from_basis_groups(std::size_t d,
                                                       const std::vector<std::vector<std::size_t>>& groups) {
  if (d == 0) throw InvalidArgument("dimension must be >= 1");
  std::vector<int> owner(d, -1);
  std::vector<ComplexMatrix> projectors;
  projectors.reserve(groups.size());
  for (std::size_t mu = 0; mu < groups.size(); ++mu) {
    if (groups[mu].empty()) throw InvalidArgument("basis group " + std::to_string(mu) + " is empty");
    ComplexMatrix p(d);
    for (const auto i : groups[mu]) {
      if (i >= d) throw InvalidArgument("basis index " + std::to_string(i) + " out of range");
      if (owner[i] >= 0) {
        throw InvalidArgument("basis groups overlap: index " + std::to_string(i) + " in groups " +
                              std::to_string(owner[i]) + " and " + std::to_string(mu));
      }
      owner[i] = static_cast<int>(mu);
      p(i, i) = 1.0;
    }
    projectors.push_back(std::move(p));
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (owner[i] < 0) throw InvalidArgument("basis groups do not cover index " + std::to_string(i));
  }
  return validate_partition(std::move(projectors), 0.0);
}

/// Each basis vector in its own block.
inline ProjectivePartition fine_grained_partition(std::size_t d) {
  std::vector<std::vector<std::size_t>> groups(d);
  for (std::size_t i = 0; i < d; ++i) groups[i] = {i};
  return partition_from_basis_groups(d, groups);
}

/// The single-block partition {I_d}.
inline ProjectivePartition trivial_partition(std::size_t d) {
  std::vector<std::size_t> all(d);
  for (std::size_t i = 0; i < d; ++i) all[i] = i;
  return partition_from_basis_groups(d, {all});
}

/// Conjugates every projector by a unitary: {V P_mu V^dagger}.
inline ProjectivePartition rotate_partition(const ProjectivePartition& p, const ComplexMatrix& v,
                                            double tol = kDefaultTol) {
  std::vector<ComplexMatrix> rotated;
  rotated.reserve(p.size());
  const auto v_dag = adjoint(v);
  for (const auto& proj : p.projectors()) rotated.push_back(v * proj * v_dag);
  return validate_partition(std::move(rotated), tol);
}

inline bool is_fine_grained(const ProjectivePartition& p) {
  for (const auto r : p.ranks()) {
    if (r != 1) return false;
  }
  return true;
}

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityOperator {
 public:
  /// Validates all three invariants at tolerance tol.
  static DensityOperator validated(ComplexMatrix m, double tol = kDefaultTol) {
    if (!is_hermitian(m, tol)) throw InvalidArgument("density operator is not Hermitian");
    if (std::abs(trace(m) - Complex{1.0, 0.0}) > tol) {
      throw InvalidArgument("density operator trace " + std::to_string(trace(m).real()) + " != 1");
    }
    // Cholesky of rho + tol*I succeeds iff the smallest eigenvalue exceeds -tol.
    ComplexMatrix::Storage shifted = m.eigen();
    shifted.diagonal().array() += tol;
    Eigen::LLT<ComplexMatrix::Storage> llt(shifted);
    if (llt.info() != Eigen::Success) throw InvalidArgument("density operator is not positive semidefinite");
    return DensityOperator(std::move(m));
  }

  /// Accepts a matrix that is positive by construction (e.g. G G^dagger / Tr, or a
  /// normalized projector) without re-running the positivity check.
  static DensityOperator structurally_positive(ComplexMatrix m) { return DensityOperator(std::move(m)); }

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  std::size_t dim() const noexcept { return matrix_.dim(); }

 private:
  explicit DensityOperator(ComplexMatrix m) : matrix_(std::move(m)) {}
  ComplexMatrix matrix_;
};

/// The partition states P_nu / Tr P_nu, in partition order.
inline std::vector<DensityOperator> partition_states(const ProjectivePartition& p) {
  std::vector<DensityOperator> out;
  out.reserve(p.size());
  for (std::size_t nu = 0; nu < p.size(); ++nu) {
    out.push_back(DensityOperator::structurally_positive(p[nu] * Complex(1.0 / static_cast<double>(p.ranks()[nu]))));
  }
  return out;
}

/// Sum_mu P_mu X P_mu.
inline ComplexMatrix block_diagonal_part(const ComplexMatrix& x, const ProjectivePartition& p) {
  if (x.dim() != p.dim()) throw DimensionMismatch(x.dim(), p.dim());
  ComplexMatrix out(x.dim());
  for (const auto& proj : p.projectors()) out += proj * x * proj;
  return out;
}

inline bool is_classical(const DensityOperator& rho, const ProjectivePartition& p, double tol = kDefaultTol) {
  return hs_norm(rho.matrix() - block_diagonal_part(rho.matrix(), p)) <= tol;
}

inline DensityOperator project_classical(const DensityOperator& rho, const ProjectivePartition& p) {
  return DensityOperator::structurally_positive(block_diagonal_part(rho.matrix(), p));
}

/// Hilbert-Schmidt-measure density operator G G^dagger / Tr(G G^dagger).
inline DensityOperator random_density(std::size_t d, Rng& rng) {
  const auto g = complex_gaussian(d, rng);
  auto m = g * adjoint(g);
  // Exact Hermiticity; the product is only Hermitian up to rounding.
  m = (m + adjoint(m)) * Complex(0.5);
  const double tr = trace(m).real();
  return DensityOperator::structurally_positive(m * Complex(1.0 / tr));
}

inline DensityOperator random_density(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return random_density(d, rng);
}

}  // namespace histcheck
