#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ssal/errors.hpp"
#include "ssal/linalg.hpp"
#include "ssal/sphere.hpp"

namespace ssal {

// Condition cap shared by the rank checks and the ridge ladder.
inline constexpr double kConditionCap = 1e8;

// k x d matrix whose row i is the feature vector of basis image O_i.
// Rows must be unit norm (they are model embeddings); near-unit drift up
// to 1e-6 is tolerated.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Matrix rows) : rows_(std::move(rows)) {
    const Eigen::Index k = rows_.rows(), d = rows_.cols();
    if (k < 1 || k > d) throw ContractViolation("FeatureMatrix: need 1 <= k <= d");
    for (Eigen::Index i = 0; i < k; ++i) {
      if (std::abs(rows_.row(i).norm() - 1.0) > 1e-6)
        throw ContractViolation("FeatureMatrix: row " + std::to_string(i) + " not unit norm");
    }
  }

  const Matrix& rows() const { return rows_; }
  Eigen::Index k() const { return rows_.rows(); }
  Eigen::Index d() const { return rows_.cols(); }

 private:
  Matrix rows_;
};

struct PcaResult {
  Matrix components;           // k x d, unit rows, deterministic sign
  Vector explained_variance;   // k, nonincreasing
  Vector mean_vector;          // d
};

struct CorrectionMatrix {
  Matrix r;                  // symmetrized pairwise-cosine matrix
  Matrix r_inverse;          // (r + ridge I)^-1
  double condition_estimate; // of r + ridge I
  double ridge_used;         // final rung of the ladder
};

// PCA over unit vectors: centered covariance, Jacobi eigendecomposition,
// top-k eigenvectors renormalized to unit length. Sign convention: the
// first coordinate with magnitude > 1e-12 is made positive, so repeat runs
// on identical data are bit-identical.
inline PcaResult run_pca(const Matrix& features, Eigen::Index k) {
  const Eigen::Index n = features.rows(), d = features.cols();
  if (k < 1 || k > d) throw ContractViolation("run_pca: need 1 <= k <= d");
  if (n <= k) throw RankDeficient("run_pca: need more samples than components");

  PcaResult out;
  out.mean_vector = features.colwise().mean();
  Matrix centered = features.rowwise() - out.mean_vector.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(n);

  SymmetricEigen eig = jacobi_eigen_sym(cov);
  double lead = std::max(eig.eigenvalues[0], 0.0);
  if (eig.eigenvalues[k - 1] <= std::max(lead * 1e-12, 1e-300))
    throw RankDeficient("run_pca: data rank below k");

  out.components.resize(k, d);
  out.explained_variance.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    Vector v = eig.eigenvectors.col(i);
    v /= v.norm();
    for (Eigen::Index j = 0; j < d; ++j) {
      if (std::abs(v[j]) > 1e-12) {
        if (v[j] < 0.0) v = -v;
        break;
      }
    }
    out.components.row(i) = v.transpose();
    out.explained_variance[i] = eig.eigenvalues[i];
  }
  return out;
}

inline PcaResult run_pca(const std::vector<UnitVector>& features, Eigen::Index k) {
  if (features.empty()) throw RankDeficient("run_pca: no samples");
  Matrix m(static_cast<Eigen::Index>(features.size()), features[0].dim());
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].dim() != features[0].dim())
      throw ContractViolation("run_pca: mixed dimensions");
    m.row(static_cast<Eigen::Index>(i)) = features[i].coords().transpose();
  }
  return run_pca(m, k);
}

// Metric projection through the explicit pseudo-inverse:
// normalize(A^+ A x) with A^+ = A^T (A A^T)^-1. For orthonormal rows this
// reduces to project_to_subsphere. Requires full row rank: condition of
// A A^T must stay below the cap (no ridge here; a ridge would silently
// change the projector).
inline UnitVector project_pseudo_inverse(const UnitVector& x, const FeatureMatrix& a) {
  if (x.dim() != a.d()) throw ContractViolation("project_pseudo_inverse: dimension mismatch");
  Matrix gram = a.rows() * a.rows().transpose();
  SymmetricInverse inv = sym_inverse_with_condition(gram);
  if (!(inv.condition < kConditionCap))
    throw RankDeficient("project_pseudo_inverse: A A^T condition above cap");
  Vector scores = a.rows() * x.coords();          // A x
  Vector weights = inv.inverse * scores;          // (A A^T)^-1 A x
  Vector p = a.rows().transpose() * weights;      // A^+ A x
  if (p.norm() <= 1e-12)
    throw DegenerateProjection("project_pseudo_inverse: input orthogonal to row span");
  return UnitVector(std::move(p));
}

// Score-space projection: normalize(A^T s). This is the attack's map from
// a score vector back to the feature sphere.
inline UnitVector score_projection(const Vector& s, const FeatureMatrix& a) {
  if (s.size() != a.k()) throw ContractViolation("score_projection: score length != k");
  Vector p = a.rows().transpose() * s;
  if (p.norm() <= 1e-12)
    throw DegenerateProjection("score_projection: near-zero combination");
  return UnitVector(std::move(p));
}

// Builds the correction matrix from a measured pairwise-cosine matrix.
// The input is symmetrized by averaging (it must already be symmetric
// within 1e-4 and have unit diagonal within 1e-3); the inverse is taken
// with a ridge that escalates from `ridge` by decades (0, 1e-8, 1e-7, ...)
// until the condition estimate drops below the cap.
inline CorrectionMatrix build_correction_matrix(const Matrix& pairwise_cosines,
                                                double ridge = 0.0) {
  const Eigen::Index k = pairwise_cosines.rows();
  if (k != pairwise_cosines.cols())
    throw ContractViolation("build_correction_matrix: input not square");
  if ((pairwise_cosines - pairwise_cosines.transpose()).cwiseAbs().maxCoeff() > 1e-4)
    throw ContractViolation("build_correction_matrix: input not symmetric within 1e-4");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(pairwise_cosines(i, i) - 1.0) > 1e-3)
      throw ContractViolation("build_correction_matrix: diagonal not within 1e-3 of 1");
  }

  CorrectionMatrix out;
  out.r = 0.5 * (pairwise_cosines + Matrix(pairwise_cosines.transpose()));

  double lambda = ridge;
  for (int rung = 0; rung < 16; ++rung) {
    Matrix regularized = out.r + lambda * Matrix::Identity(k, k);
    SymmetricInverse inv = sym_inverse_with_condition(regularized);
    if (inv.condition < kConditionCap) {
      out.r_inverse = inv.inverse;
      out.condition_estimate = inv.condition;
      out.ridge_used = lambda;
      return out;
    }
    lambda = (lambda == 0.0) ? 1e-8 : lambda * 10.0;
  }
  throw RankDeficient("build_correction_matrix: ridge ladder exhausted");
}

}  // namespace ssal
