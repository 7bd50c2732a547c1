#include <gtest/gtest.h>

#include "ssal/linalg.hpp"

namespace {

using ssal::Matrix;
using ssal::Rng;
using ssal::Vector;

TEST(NormalizedChecked, UnitResultAndZeroRejection) {
  Vector v(3);
  v << 3.0, 0.0, 4.0;
  Vector u = ssal::normalized_checked(v);
  EXPECT_NEAR(u.norm(), 1.0, 1e-15);
  EXPECT_NEAR(u(0), 0.6, 1e-15);
  EXPECT_THROW(ssal::normalized_checked(Vector::Zero(3)), ssal::DegenerateProjection);
}

TEST(GramSchmidt, ProducesOrthonormalRows) {
  Rng rng(21);
  Matrix g(6, 10);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.gaussian();
  Matrix q = ssal::gram_schmidt_rows(g);
  Matrix gram = q * q.transpose();
  EXPECT_LT((gram - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GramSchmidt, RejectsDependentRows) {
  Matrix g(3, 4);
  g.setZero();
  g(0, 0) = 1.0;
  g(1, 1) = 1.0;
  g.row(2) = 2.0 * g.row(0) - 3.0 * g.row(1);
  EXPECT_THROW(ssal::gram_schmidt_rows(g), ssal::RankDeficient);
}

TEST(GramSchmidt, NearlyDependentRowsStayOrthonormal) {
  Rng rng(22);
  Matrix g(3, 8);
  Vector fresh(8);
  for (Eigen::Index j = 0; j < 8; ++j) {
    g(0, j) = rng.gaussian();
    g(1, j) = rng.gaussian();
    fresh(j) = rng.gaussian();
  }
  // Almost inside span{row0, row1}, but with a tiny full-rank component.
  g.row(2) = g.row(0) + 1e-7 * fresh.transpose();
  Matrix q = ssal::gram_schmidt_rows(g);
  EXPECT_LT((q * q.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RandomOrthonormalRows, ShapeOrthonormalityAndContract) {
  Rng rng(31);
  Matrix q = ssal::random_orthonormal_rows(5, 12, rng);
  ASSERT_EQ(q.rows(), 5);
  ASSERT_EQ(q.cols(), 12);
  EXPECT_LT((q * q.transpose() - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(ssal::random_orthonormal_rows(13, 12, rng), ssal::ContractViolation);
  EXPECT_THROW(ssal::random_orthonormal_rows(0, 12, rng), ssal::ContractViolation);
}

TEST(RandomOrthonormalRows, DeterministicForFixedSeed) {
  Rng a(99), b(99);
  Matrix qa = ssal::random_orthonormal_rows(4, 9, a);
  Matrix qb = ssal::random_orthonormal_rows(4, 9, b);
  EXPECT_TRUE(qa == qb);
}

TEST(JacobiEigen, KnownTwoByTwo) {
  Matrix a(2, 2);
  a << 2.0, 1.0, 1.0, 2.0;
  ssal::SymmetricEigen eig = ssal::jacobi_eigen_sym(a);
  EXPECT_NEAR(eig.eigenvalues(0), 3.0, 1e-12);
  EXPECT_NEAR(eig.eigenvalues(1), 1.0, 1e-12);
}

TEST(JacobiEigen, ReconstructsRandomSymmetricMatrix) {
  Rng rng(41);
  const Eigen::Index n = 12;
  Matrix b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = rng.gaussian();
  Matrix a = b + Matrix(b.transpose());
  ssal::SymmetricEigen eig = ssal::jacobi_eigen_sym(a);
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    EXPECT_GE(eig.eigenvalues(i), eig.eigenvalues(i + 1));
  Matrix recon = eig.eigenvectors * eig.eigenvalues.asDiagonal() * eig.eigenvectors.transpose();
  EXPECT_LT((recon - a).cwiseAbs().maxCoeff(), 1e-10);
  Matrix vtv = eig.eigenvectors.transpose() * eig.eigenvectors;
  EXPECT_LT((vtv - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(JacobiEigen, RejectsNonSquareAndAsymmetric) {
  EXPECT_THROW(ssal::jacobi_eigen_sym(Matrix::Zero(2, 3)), ssal::ContractViolation);
  Matrix a(2, 2);
  a << 1.0, 0.5, -0.5, 1.0;
  EXPECT_THROW(ssal::jacobi_eigen_sym(a), ssal::ContractViolation);
}

TEST(JacobiEigen, BitStableAcrossRuns) {
  Rng rng(43);
  Matrix b(8, 8);
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = 0; j < 8; ++j) b(i, j) = rng.gaussian();
  Matrix a = b + Matrix(b.transpose());
  ssal::SymmetricEigen e1 = ssal::jacobi_eigen_sym(a);
  ssal::SymmetricEigen e2 = ssal::jacobi_eigen_sym(a);
  EXPECT_TRUE(e1.eigenvalues == e2.eigenvalues);
  EXPECT_TRUE(e1.eigenvectors == e2.eigenvectors);
}

TEST(SymInverse, InvertsWellConditionedMatrix) {
  Rng rng(51);
  Matrix b(6, 6);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) b(i, j) = rng.gaussian();
  Matrix a = b * b.transpose() + 0.5 * Matrix::Identity(6, 6);
  ssal::SymmetricInverse inv = ssal::sym_inverse_with_condition(a);
  EXPECT_LT((a * inv.inverse - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GE(inv.condition, 1.0);
}

TEST(SymInverse, ConditionOfDiagonalMatrix) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 10.0;
  a(1, 1) = 2.0;
  a(2, 2) = 1.0;
  ssal::SymmetricInverse inv = ssal::sym_inverse_with_condition(a);
  EXPECT_NEAR(inv.condition, 10.0, 1e-9);
  EXPECT_NEAR(inv.inverse(0, 0), 0.1, 1e-12);
}

TEST(SymInverse, SingularMatrixReportsInfiniteCondition) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 1.0;
  ssal::SymmetricInverse inv = ssal::sym_inverse_with_condition(a);
  EXPECT_TRUE(std::isinf(inv.condition));
}

}  // namespace
