#include <vector>

#include <gtest/gtest.h>

#include "ssal/subspace.hpp"

namespace {

using ssal::FeatureMatrix;
using ssal::Matrix;
using ssal::Rng;
using ssal::UnitVector;
using ssal::Vector;

FeatureMatrix orthonormal_features(Eigen::Index k, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  return FeatureMatrix(ssal::random_orthonormal_rows(k, d, rng));
}

TEST(FeatureMatrixType, RejectsNonUnitRows) {
  Matrix rows = Matrix::Zero(2, 4);
  rows(0, 0) = 1.0;
  rows(1, 1) = 0.5;
  EXPECT_THROW(FeatureMatrix{rows}, ssal::ContractViolation);
}

TEST(Pca, RecoversPlantedSubspaceWithOrderedVariances) {
  const Eigen::Index d = 10, k = 3;
  Rng rng(61);
  Matrix dirs = ssal::random_orthonormal_rows(k, d, rng);
  std::vector<double> scales{3.0, 2.0, 1.0};
  std::vector<UnitVector> features;
  for (int i = 0; i < 400; ++i) {
    Vector x = Vector::Zero(d);
    for (Eigen::Index j = 0; j < k; ++j)
      x += scales[static_cast<std::size_t>(j)] * rng.gaussian() * dirs.row(j).transpose();
    x += 1e-3 * rng.gaussian_vector(d);  // tiny fuzz keeps the covariance full story
    features.push_back(UnitVector(ssal::normalized_checked(x)));
  }
  ssal::PcaResult pca = ssal::run_pca(features, k);
  ASSERT_EQ(pca.components.rows(), k);
  ASSERT_EQ(pca.components.cols(), d);
  for (Eigen::Index j = 0; j + 1 < k; ++j)
    EXPECT_GE(pca.explained_variance(j), pca.explained_variance(j + 1));
  // Every component lies in the planted span.
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector c = pca.components.row(j).transpose();
    Vector residual = c - dirs.transpose() * (dirs * c);
    EXPECT_LT(residual.norm(), 0.05);
  }
}

TEST(Pca, DeterministicAndSampleCountContract) {
  std::vector<UnitVector> features;
  Rng rng(62);
  for (int i = 0; i < 12; ++i) features.push_back(ssal::sample_uniform_sphere(6, 1, rng)[0]);
  ssal::PcaResult a = ssal::run_pca(features, 3);
  ssal::PcaResult b = ssal::run_pca(features, 3);
  EXPECT_TRUE(a.components == b.components);
  EXPECT_TRUE(a.explained_variance == b.explained_variance);
  std::vector<UnitVector> tiny(features.begin(), features.begin() + 3);
  EXPECT_THROW(ssal::run_pca(tiny, 3), ssal::RankDeficient);
}

TEST(Pca, RankDeficientDataRejected) {
  // All samples on a single line: rank 1 < k = 2.
  std::vector<UnitVector> features;
  Vector v = Vector::Zero(5);
  v(0) = 1.0;
  for (int i = 0; i < 30; ++i) features.push_back(UnitVector(i % 2 == 0 ? v : Vector(-v)));
  EXPECT_THROW(ssal::run_pca(features, 2), ssal::RankDeficient);
}

TEST(PseudoInverseProjection, FixesRowSpaceVectors) {
  FeatureMatrix a = orthonormal_features(4, 12, 71);
  Rng rng(72);
  Vector coeff = rng.gaussian_vector(4);
  UnitVector x(ssal::normalized_checked(a.rows().transpose() * coeff));
  UnitVector p = ssal::project_pseudo_inverse(x, a);
  EXPECT_LT((p.coords() - x.coords()).norm(), 1e-10);
}

TEST(PseudoInverseProjection, IsIdempotent) {
  FeatureMatrix a = orthonormal_features(5, 16, 73);
  Rng rng(74);
  UnitVector x = ssal::sample_uniform_sphere(16, 1, rng)[0];
  UnitVector p1 = ssal::project_pseudo_inverse(x, a);
  UnitVector p2 = ssal::project_pseudo_inverse(p1, a);
  EXPECT_LT((p2.coords() - p1.coords()).norm(), 1e-10);
}

TEST(PseudoInverseProjection, MatchesSubsphereProjectionOnOrthonormalRows) {
  Rng rng(75);
  Matrix rows = ssal::random_orthonormal_rows(3, 9, rng);
  FeatureMatrix a{rows};
  ssal::SubsphereBasis basis(rows);
  for (int i = 0; i < 20; ++i) {
    UnitVector x = ssal::sample_uniform_sphere(9, 1, rng)[0];
    UnitVector p = ssal::project_pseudo_inverse(x, a);
    UnitVector q = ssal::project_to_subsphere(x, basis);
    EXPECT_LT((p.coords() - q.coords()).norm(), 1e-10);
  }
}

TEST(PseudoInverseProjection, HandlesNonOrthogonalRows) {
  // Oblique unit rows: projection must still land in the row span and be the
  // least-squares reconstruction, not a naive transpose application.
  Vector r0(3), r1(3);
  r0 << 1.0, 0.0, 0.0;
  r1 << std::sqrt(0.5), std::sqrt(0.5), 0.0;
  Matrix rows(2, 3);
  rows.row(0) = r0.transpose();
  rows.row(1) = r1.transpose();
  FeatureMatrix a{rows};
  Vector target(3);
  target << 0.3, 0.7, 0.0;  // already in span{r0, r1}
  UnitVector x(ssal::normalized_checked(target));
  UnitVector p = ssal::project_pseudo_inverse(x, a);
  EXPECT_LT((p.coords() - x.coords()).norm(), 1e-10);
}

TEST(PseudoInverseProjection, OrthogonalInputAndConditionCap) {
  FeatureMatrix a{(Matrix(1, 4) << 1.0, 0.0, 0.0, 0.0).finished()};
  Vector z = Vector::Zero(4);
  z(2) = 1.0;
  EXPECT_THROW(ssal::project_pseudo_inverse(UnitVector(z), a), ssal::DegenerateProjection);

  // Nearly identical rows push the Gram condition over the cap.
  Vector r0(4), r1(4);
  r0 << 1.0, 0.0, 0.0, 0.0;
  r1 = r0;
  r1(1) = 1e-9;
  Matrix rows(2, 4);
  rows.row(0) = r0.transpose();
  rows.row(1) = ssal::normalized_checked(r1).transpose();
  FeatureMatrix near_dup{rows};
  Rng rng(76);
  UnitVector x = ssal::sample_uniform_sphere(4, 1, rng)[0];
  EXPECT_THROW(ssal::project_pseudo_inverse(x, near_dup), ssal::RankDeficient);
}

TEST(ScoreProjection, MatchesWeightedRowCombination) {
  FeatureMatrix a = orthonormal_features(3, 8, 81);
  Vector s(3);
  s << 0.2, -1.0, 0.4;
  UnitVector p = ssal::score_projection(s, a);
  Vector expected = ssal::normalized_checked(a.rows().transpose() * s);
  EXPECT_LT((p.coords() - expected).norm(), 1e-15);
  EXPECT_THROW(ssal::score_projection(Vector::Zero(3), a), ssal::DegenerateProjection);
}

TEST(CorrectionMatrix, IdentityPassesThrough) {
  Matrix r = Matrix::Identity(5, 5);
  Matrix inv = ssal::build_correction_matrix(r).r_inverse;
  EXPECT_LT((inv - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(CorrectionMatrix, InvertsWellConditionedGram) {
  Rng rng(82);
  Matrix q = ssal::random_orthonormal_rows(4, 10, rng);
  Matrix fuzz(4, 10);
  for (Eigen::Index i = 0; i < 4; ++i)
    fuzz.row(i) = ssal::normalized_checked(q.row(i).transpose() + 0.2 * rng.gaussian_vector(10)).transpose();
  Matrix r = fuzz * fuzz.transpose();
  Matrix inv = ssal::build_correction_matrix(r).r_inverse;
  EXPECT_LT((r * inv - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(CorrectionMatrix, ContractChecks) {
  EXPECT_THROW(ssal::build_correction_matrix(Matrix::Zero(2, 3)), ssal::ContractViolation);

  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 0.2;  // asymmetric beyond tolerance
  EXPECT_THROW(ssal::build_correction_matrix(asym), ssal::ContractViolation);

  Matrix off_diag = Matrix::Identity(3, 3);
  off_diag(0, 0) = 0.5;  // cosine gram must have unit diagonal
  EXPECT_THROW(ssal::build_correction_matrix(off_diag), ssal::ContractViolation);
}

TEST(CorrectionMatrix, RidgeLadderHandlesSingularGram) {
  // All-ones "gram": symmetric, unit diagonal, rank 1. The ridge must kick in
  // and return a finite matrix rather than dividing by zero.
  Matrix r = Matrix::Ones(4, 4);
  Matrix inv = ssal::build_correction_matrix(r).r_inverse;
  EXPECT_TRUE(inv.allFinite());
  EXPECT_LT((inv - Matrix(inv.transpose())).cwiseAbs().maxCoeff(), 1e-8);
}

}  // namespace
