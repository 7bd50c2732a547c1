#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "ssal/errors.hpp"
#include "ssal/rng.hpp"

namespace ssal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Normalizes v to unit length; near-zero input is a degenerate direction.
inline Vector normalized_checked(const Vector& v, double eps = 1e-12) {
  double norm = v.norm();
  if (norm <= eps) throw DegenerateProjection("normalize: near-zero vector");
  return v / norm;
}

// Orthonormalizes the rows of `rows` in place order, classical Gram-Schmidt
// with one re-orthogonalization pass per row ("twice is enough"): each row
// is orthogonalized against all previous rows twice before normalization,
// which keeps pairwise inner products at the 1e-15 level even for nearly
// dependent inputs. Throws RankDeficient if a row collapses.
inline Matrix gram_schmidt_rows(Matrix rows) {
  const Eigen::Index k = rows.rows();
  for (Eigen::Index i = 0; i < k; ++i) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < i; ++j) {
        rows.row(i) -= rows.row(i).dot(rows.row(j)) * rows.row(j);
      }
    }
    double norm = rows.row(i).norm();
    if (norm <= 1e-10) {
      throw RankDeficient("gram_schmidt_rows: row " + std::to_string(i) +
                          " is linearly dependent");
    }
    rows.row(i) /= norm;
  }
  return rows;
}

// Random k x d matrix with orthonormal rows: Gram-Schmidt on Gaussian draws.
inline Matrix random_orthonormal_rows(Eigen::Index k, Eigen::Index d, Rng& rng) {
  if (k < 1 || k > d) throw ContractViolation("random_orthonormal_rows: need 1 <= k <= d");
  Matrix g(k, d);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.gaussian();
  return gram_schmidt_rows(std::move(g));
}

struct SymmetricEigen {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // column i pairs with eigenvalues[i]
};

// Cyclic-by-row Jacobi eigensolver for symmetric matrices. Deterministic
// sweep order, no pivot search, so results are bit-stable across runs.
// Converges quadratically; intended for the d <= 1024 desk scale.
inline SymmetricEigen jacobi_eigen_sym(Matrix a) {
  const Eigen::Index n = a.rows();
  if (n != a.cols()) throw ContractViolation("jacobi_eigen_sym: matrix not square");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw ContractViolation("jacobi_eigen_sym: matrix not symmetric");
  a = 0.5 * (a + Matrix(a.transpose()));

  Matrix v = Matrix::Identity(n, n);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-14 * scale * n) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        // Smaller-angle root of t^2 + 2 t theta - 1 = 0.
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;

        for (Eigen::Index i = 0; i < n; ++i) {
          double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  SymmetricEigen out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues[i] = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.eigenvectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

struct SymmetricInverse {
  Matrix inverse;
  double condition;  // |lambda|_max / |lambda|_min
};

// Inverse of a symmetric matrix via its eigendecomposition, with the
// condition estimate used by the rank and ridge contracts.
inline SymmetricInverse sym_inverse_with_condition(const Matrix& a) {
  SymmetricEigen eig = jacobi_eigen_sym(a);
  const Eigen::Index n = a.rows();
  double abs_max = 0.0, abs_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    abs_max = std::max(abs_max, std::abs(eig.eigenvalues[i]));
    abs_min = std::min(abs_min, std::abs(eig.eigenvalues[i]));
  }
  SymmetricInverse out;
  out.condition = (abs_min <= 0.0) ? std::numeric_limits<double>::infinity()
                                   : abs_max / abs_min;
  if (!std::isfinite(out.condition)) {
    out.inverse = Matrix::Zero(n, n);
    return out;
  }
  Matrix inv_diag = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) inv_diag(i, i) = 1.0 / eig.eigenvalues[i];
  out.inverse = eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();
  return out;
}

}  // namespace ssal
