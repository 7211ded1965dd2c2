#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "oracles.hpp"

using namespace corrlog;

TEST(SymmetricMatrix, SymmetrizesInput) {
  Matrix a(2, 2);
  a << 1, 2, 4, 3;
  const SymmetricMatrix s(a);
  EXPECT_EQ(s(0, 1), 3.0);
  EXPECT_EQ(s(1, 0), 3.0);
}

TEST(SymmetricMatrix, RejectsNonSquareAndNonFinite) {
  EXPECT_THROW(SymmetricMatrix(Matrix::Zero(2, 3)), ShapeMismatch);
  Matrix a = Matrix::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(SymmetricMatrix{a}, NonFiniteValue);
}

TEST(SPDMatrix, AcceptsPositiveDefiniteRejectsSemidefinite) {
  Matrix a(2, 2);
  a << 2, 1, 1, 2;
  EXPECT_NO_THROW(SPDMatrix{a});
  a << 1, 1, 1, 1;
  EXPECT_THROW(SPDMatrix{a}, NotPositiveDefinite);
  a << 1, 2, 2, 1;
  EXPECT_THROW(SPDMatrix{a}, NotPositiveDefinite);
}

TEST(CorrelationMatrix, SnapsDiagonalWithinTolerance) {
  Matrix a(2, 2);
  a << 1 + 1e-13, 0.3, 0.3, 1 - 1e-13;
  const CorrelationMatrix c(a);
  EXPECT_EQ(c(0, 0), 1.0);
  EXPECT_EQ(c(1, 1), 1.0);
}

TEST(CorrelationMatrix, RejectsBadDiagonalEntriesAndIndefinite) {
  Matrix a(2, 2);
  a << 1.1, 0.3, 0.3, 1;
  EXPECT_THROW(CorrelationMatrix{a}, DataError);
  a << 1, 1.2, 1.2, 1;
  EXPECT_THROW(CorrelationMatrix{a}, DataError);
  Matrix b(3, 3);
  b << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
  EXPECT_THROW(CorrelationMatrix{b}, NotPositiveDefinite);
}

TEST(HollowMatrix, ZeroesSmallDiagonalRejectsLarge) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 0) = 0.5;
  a(2, 2) = 1e-9;
  const HollowMatrix h(a);
  EXPECT_EQ(h(2, 2), 0.0);
  a(2, 2) = 1e-6;
  EXPECT_THROW(HollowMatrix{a}, DataError);
}

TEST(HollowMatrix, OffDropsDiagonal) {
  std::mt19937_64 rng(1);
  const Matrix a = oracle::random_symmetric(4, rng);
  const HollowMatrix h = HollowMatrix::off(SymmetricMatrix(a));
  for (Index i = 0; i < 4; ++i) {
    EXPECT_EQ(h(i, i), 0.0);
    for (Index j = 0; j < 4; ++j) {
      if (i != j) {
        EXPECT_EQ(h(i, j), a(i, j));
      }
    }
  }
}

TEST(HollowMatrix, VectorSpaceArithmetic) {
  std::mt19937_64 rng(2);
  const HollowMatrix x(oracle::random_hollow(4, rng));
  const HollowMatrix y(oracle::random_hollow(4, rng));
  const HollowMatrix z = 2.0 * x - y / 4.0;
  EXPECT_LE((z.matrix() - (2.0 * x.matrix() - 0.25 * y.matrix())).norm(), 1e-15);
  EXPECT_EQ((x - x).frobenius_norm(), 0.0);
  EXPECT_THROW(x + HollowMatrix::zero(3), ShapeMismatch);
}

TEST(RowZeroMatrix, ValidatesAndRepairs) {
  std::mt19937_64 rng(3);
  const Matrix y = oracle::random_rowzero(5, rng);
  EXPECT_NO_THROW(RowZeroMatrix{y});
  Matrix bad = y;
  bad(0, 0) += 1e-6;
  EXPECT_THROW(RowZeroMatrix{bad}, DataError);

  Matrix noisy = y;
  noisy(1, 2) += 1e-10;
  noisy(2, 1) += 1e-10;
  const RowZeroMatrix fixed = RowZeroMatrix::repair(noisy);
  EXPECT_LE(fixed.matrix().rowwise().sum().cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((fixed.matrix() - y).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_THROW(RowZeroMatrix::repair(bad), NumericalError);
}

TEST(RowZeroMatrix, RepairIsProjection) {
  std::mt19937_64 rng(4);
  const Matrix y = oracle::random_rowzero(6, rng);
  const RowZeroMatrix r = RowZeroMatrix::repair(y);
  EXPECT_LE((r.matrix() - y).norm(), 1e-14);
}

TEST(DiagonalMatrix, Positivity) {
  EXPECT_TRUE(DiagonalMatrix::identity(3).is_positive());
  EXPECT_FALSE(DiagonalMatrix::zero(3).is_positive());
  EXPECT_THROW(DiagonalMatrix::zero(2).require_positive(), DataError);
  const DiagonalMatrix d(Vector::LinSpaced(3, 1, 3));
  EXPECT_EQ(d.dense()(2, 2), 3.0);
  EXPECT_EQ(d.dense()(0, 2), 0.0);
}
