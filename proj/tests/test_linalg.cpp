#include <gtest/gtest.h>

#include <cmath>

#include "histcheck/linalg.hpp"
#include "oracle.hpp"

using namespace histcheck;

namespace {

double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.eigen() - b.eigen()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(ComplexMatrix, RejectsBadShapes) {
  ComplexMatrix::Storage rect(2, 3);
  rect.setZero();
  EXPECT_THROW(ComplexMatrix{rect}, InvalidArgument);
  EXPECT_THROW(ComplexMatrix(ComplexMatrix::Storage(0, 0)), InvalidArgument);
  ComplexMatrix::Storage nan_entry = ComplexMatrix::Storage::Zero(2, 2);
  nan_entry(0, 1) = Complex(std::nan(""), 0.0);
  EXPECT_THROW(ComplexMatrix{nan_entry}, InvalidArgument);
}

TEST(ComplexMatrix, MultiplyRejectsDimensionMismatch) {
  EXPECT_THROW(ComplexMatrix::identity(2) * ComplexMatrix::identity(3), DimensionMismatch);
  EXPECT_THROW(commutator(ComplexMatrix::identity(2), ComplexMatrix::identity(3)), DimensionMismatch);
}

TEST(ComplexMatrix, ProductMatchesNaiveLoops) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 2 + t % 4;
    const auto a = complex_gaussian(d, rng);
    const auto b = complex_gaussian(d, rng);
    EXPECT_LT(oracle::max_abs_diff(oracle::mul(oracle::from(a), oracle::from(b)), a * b), 1e-12);
    EXPECT_LT(oracle::max_abs_diff(oracle::dagger(oracle::from(a)), adjoint(a)), 1e-15);
  }
}

TEST(Linalg, HadamardBasics) {
  const auto h = hadamard();
  EXPECT_TRUE(is_unitary(h));
  EXPECT_TRUE(is_hermitian(h));
  EXPECT_LT(max_diff(h * h, ComplexMatrix::identity(2)), 1e-15);
  EXPECT_NEAR(hs_norm(h), std::sqrt(2.0), 1e-15);
}

TEST(Linalg, CommutatorOfHadamardEvolvedProjector) {
  const auto h = hadamard();
  const auto p0 = ComplexMatrix::diagonal({1.0, 0.0});
  const auto p1 = ComplexMatrix::diagonal({0.0, 1.0});
  const auto c = commutator(h * p0 * h, p1);
  const ComplexMatrix expected{{0.0, 0.5}, {-0.5, 0.0}};
  EXPECT_LT(max_diff(c, expected), 1e-15);
  EXPECT_NEAR(hs_norm(c), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Linalg, PredicatesRejectNearMisses) {
  auto p = ComplexMatrix::diagonal({1.0, 0.0});
  EXPECT_TRUE(is_projector(p));
  p(0, 0) = 1.0 + 1e-6;
  EXPECT_FALSE(is_projector(p));
  ComplexMatrix nh{{1.0, Complex(0.0, 1.0)}, {Complex(0.0, 1.0), 0.0}};
  EXPECT_FALSE(is_hermitian(nh));
  EXPECT_FALSE(is_unitary(ComplexMatrix::diagonal({1.0, 0.5})));
}

TEST(Linalg, MatrixPowerMatchesRepeatedProduct) {
  const auto u = haar_random_unitary(3, std::uint64_t{11});
  EXPECT_LT(max_diff(matrix_power(u, 0), ComplexMatrix::identity(3)), 1e-15);
  EXPECT_LT(oracle::max_abs_diff(oracle::power(oracle::from(u), 5), matrix_power(u, 5)), 1e-12);
}

TEST(Linalg, HsInnerIsConjugateLinearInFirstArgument) {
  Rng rng(3);
  const auto a = complex_gaussian(3, rng);
  const auto b = complex_gaussian(3, rng);
  const Complex direct = trace(adjoint(a) * b);
  EXPECT_LT(std::abs(hs_inner(a, b) - direct), 1e-12);
  EXPECT_NEAR(hs_inner(a, a).real(), hs_norm(a) * hs_norm(a), 1e-12);
}

// Property tests over random unitaries and matrices.

TEST(LinalgProperty, HsNormUnitarilyInvariant) {
  Rng rng(101);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + t % 3;
    const auto a = complex_gaussian(d, rng);
    const auto u = haar_random_unitary(d, rng);
    const auto v = haar_random_unitary(d, rng);
    EXPECT_NEAR(hs_norm(u * a * v), hs_norm(a), 1e-12 * (1.0 + hs_norm(a)));
  }
}

TEST(LinalgProperty, TriangleInequality) {
  Rng rng(202);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + t % 3;
    const auto a = complex_gaussian(d, rng);
    const auto b = complex_gaussian(d, rng);
    EXPECT_LE(hs_norm(a + b), hs_norm(a) + hs_norm(b) + 1e-12);
  }
}

TEST(LinalgProperty, CommutatorAntisymmetric) {
  Rng rng(303);
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 2 + t % 3;
    const auto a = complex_gaussian(d, rng);
    const auto b = complex_gaussian(d, rng);
    EXPECT_LT(max_diff(commutator(a, b), commutator(b, a) * Complex(-1.0)), 1e-12);
  }
}

TEST(Haar, UnitaryAndSeedReproducible) {
  for (std::size_t d = 1; d <= 6; ++d) {
    const auto u = haar_random_unitary(d, std::uint64_t{42});
    EXPECT_TRUE(is_unitary(u, 1e-12));
    EXPECT_EQ(u, haar_random_unitary(d, std::uint64_t{42}));
  }
  EXPECT_FALSE(haar_random_unitary(3, std::uint64_t{1}) == haar_random_unitary(3, std::uint64_t{2}));
}

TEST(Haar, FirstEntryMomentAtD2) {
  // E|u_00|^2 = 1/d.
  Rng rng(2024);
  const int n = 20000;
  double sum = 0.0;
  for (int t = 0; t < n; ++t) sum += std::norm(haar_random_unitary(2, rng)(0, 0));
  EXPECT_NEAR(sum / n, 0.5, 0.02);
}

TEST(Haar, PhaseFixMakesSecondMomentUniform) {
  // Without the phase correction the diagonal of R is real positive and
  // E|u_00|^4 drifts; Haar gives 2/(d(d+1)) = 1/3 at d = 2.
  Rng rng(77);
  const int n = 20000;
  double sum = 0.0;
  for (int t = 0; t < n; ++t) sum += std::pow(std::norm(haar_random_unitary(2, rng)(0, 0)), 2);
  EXPECT_NEAR(sum / n, 1.0 / 3.0, 0.02);
}
