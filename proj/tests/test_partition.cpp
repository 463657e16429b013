#include <gtest/gtest.h>

#include "histcheck/partition.hpp"

using namespace histcheck;

namespace {

PartitionError::Kind kind_of(const std::vector<ComplexMatrix>& ps) {
  try {
    validate_partition(ps);
  } catch (const PartitionError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "partition unexpectedly valid";
  return PartitionError::Kind::Empty;
}

}  // namespace

TEST(Partition, FineAndTrivial) {
  const auto fine = fine_grained_partition(3);
  EXPECT_EQ(fine.size(), 3u);
  EXPECT_TRUE(is_fine_grained(fine));
  const auto triv = trivial_partition(3);
  EXPECT_EQ(triv.size(), 1u);
  EXPECT_EQ(triv.ranks()[0], 3u);
  EXPECT_FALSE(is_fine_grained(triv));
}

TEST(Partition, BasisGroupsRanksAndOrder) {
  const auto p = partition_from_basis_groups(4, {{2}, {0, 3}, {1}});
  EXPECT_EQ(p.ranks(), (std::vector<std::size_t>{1, 2, 1}));
  EXPECT_EQ(p[1](0, 0), Complex(1.0));
  EXPECT_EQ(p[1](3, 3), Complex(1.0));
  EXPECT_EQ(p[0](2, 2), Complex(1.0));
}

TEST(Partition, BasisGroupsRejectOverlapGapAndEmpty) {
  EXPECT_THROW(partition_from_basis_groups(3, {{0, 1}, {1, 2}}), InvalidArgument);
  EXPECT_THROW(partition_from_basis_groups(3, {{0}, {1}}), InvalidArgument);
  EXPECT_THROW(partition_from_basis_groups(3, {{0, 1, 2}, {}}), InvalidArgument);
  EXPECT_THROW(partition_from_basis_groups(2, {{0}, {5}}), InvalidArgument);
}

TEST(Partition, ErrorKinds) {
  using K = PartitionError::Kind;
  EXPECT_EQ(kind_of({}), K::Empty);
  EXPECT_EQ(kind_of({ComplexMatrix::identity(2), ComplexMatrix::identity(3)}), K::DimensionMismatch);
  EXPECT_EQ(kind_of({ComplexMatrix::diagonal({2.0, 0.0}), ComplexMatrix::diagonal({0.0, 1.0})}), K::NotAProjector);
  EXPECT_EQ(kind_of({ComplexMatrix(2), ComplexMatrix::identity(2)}), K::BadRank);
  EXPECT_EQ(kind_of({ComplexMatrix::diagonal({1.0, 0.0}), ComplexMatrix::diagonal({1.0, 0.0})}), K::NotOrthogonal);
  EXPECT_EQ(kind_of({ComplexMatrix::diagonal({1.0, 0.0, 0.0}), ComplexMatrix::diagonal({0.0, 1.0, 0.0})}),
            K::NotComplete);
}

TEST(Partition, OverlappingRankOneProjectorsNamePair) {
  const double s = 0.5;
  const ComplexMatrix plus{{s, s}, {s, s}};
  try {
    validate_partition({ComplexMatrix::diagonal({1.0, 0.0}), plus});
    FAIL();
  } catch (const PartitionError& e) {
    EXPECT_EQ(e.kind(), PartitionError::Kind::NotOrthogonal);
    EXPECT_EQ(e.first(), 0u);
    EXPECT_EQ(e.second(), 1u);
    EXPECT_NE(std::string(e.what()).find("NotOrthogonal(0, 1)"), std::string::npos);
  }
}

TEST(Partition, RotationPreservesValidity) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto v = haar_random_unitary(4, rng);
    const auto p = rotate_partition(partition_from_basis_groups(4, {{0, 1}, {2}, {3}}), v);
    EXPECT_EQ(p.ranks(), (std::vector<std::size_t>{2, 1, 1}));
  }
}

TEST(Partition, CardinalityBoundedByDimension) {
  for (std::size_t d = 1; d <= 5; ++d) {
    EXPECT_LE(fine_grained_partition(d).size(), d);
    EXPECT_LE(trivial_partition(d).size(), d);
  }
}

TEST(Density, ValidationRejectsEachInvariant) {
  EXPECT_NO_THROW(DensityOperator::validated(ComplexMatrix::diagonal({0.25, 0.75})));
  EXPECT_THROW(DensityOperator::validated(ComplexMatrix::diagonal({0.5, 0.6})), InvalidArgument);
  EXPECT_THROW(DensityOperator::validated(ComplexMatrix::diagonal({1.5, -0.5})), InvalidArgument);
  EXPECT_THROW(DensityOperator::validated(ComplexMatrix{{0.5, 0.1}, {0.2, 0.5}}), InvalidArgument);
  // Pure state |+><+| is PSD with a zero eigenvalue.
  EXPECT_NO_THROW(DensityOperator::validated(ComplexMatrix{{0.5, 0.5}, {0.5, 0.5}}));
}

TEST(Density, PartitionStatesNormalized) {
  const auto p = partition_from_basis_groups(3, {{0, 2}, {1}});
  const auto states = partition_states(p);
  ASSERT_EQ(states.size(), 2u);
  EXPECT_NEAR(trace(states[0].matrix()).real(), 1.0, 1e-15);
  EXPECT_NEAR(states[0].matrix()(2, 2).real(), 0.5, 1e-15);
  for (const auto& s : states) EXPECT_TRUE(is_classical(s, p));
}

TEST(Density, RandomDensityValidAndPurity) {
  for (std::size_t d : {2u, 3u}) {
    Rng rng(99 + d);
    double purity = 0.0;
    const int n = 4000;
    for (int t = 0; t < n; ++t) {
      const auto rho = random_density(d, rng);
      if (t < 50) {
        EXPECT_NO_THROW(DensityOperator::validated(rho.matrix(), 1e-12));
      }
      purity += trace(rho.matrix() * rho.matrix()).real();
    }
    // Hilbert-Schmidt measure: E Tr rho^2 = 2d / (d^2 + 1).
    const double expected = 2.0 * d / (d * d + 1.0);
    EXPECT_NEAR(purity / n, expected, 0.02) << "d=" << d;
  }
}

TEST(Density, ClassicalProjection) {
  const auto p = partition_from_basis_groups(3, {{0, 1}, {2}});
  const auto rho = random_density(3, std::uint64_t{8});
  EXPECT_FALSE(is_classical(rho, p));
  const auto c = project_classical(rho, p);
  EXPECT_TRUE(is_classical(c, p));
  EXPECT_NEAR(trace(c.matrix()).real(), 1.0, 1e-12);
  // The block inside {0,1} survives.
  EXPECT_EQ(c.matrix()(0, 1), rho.matrix()(0, 1));
  EXPECT_EQ(c.matrix()(0, 2), Complex(0.0));
}

TEST(PartitionProperty, BlockDiagonalPartKeepsTraceAndStatesAreOrthogonal) {
  Rng rng(71);
  const std::vector<std::vector<std::vector<std::size_t>>> groups{{{0}, {1}}, {{0, 1}, {2}}, {{0, 1}, {2}, {3}}};
  for (int t = 0; t < 40; ++t) {
    const std::size_t d = 2 + t % 3;
    const auto p = rotate_partition(partition_from_basis_groups(d, groups[d - 2]), haar_random_unitary(d, rng));
    const auto rho = random_density(d, rng);
    EXPECT_NEAR(std::abs(trace(block_diagonal_part(rho.matrix(), p)) - trace(rho.matrix())), 0.0, 1e-12);
    EXPECT_TRUE(is_classical(project_classical(rho, p), p, 1e-10));
    const auto states = partition_states(p);
    for (std::size_t a = 0; a < states.size(); ++a) {
      for (std::size_t b = 0; b < states.size(); ++b) {
        if (a != b) {
          EXPECT_NEAR(std::abs(hs_inner(states[a].matrix(), states[b].matrix())), 0.0, 1e-12);
        }
      }
    }
  }
}
