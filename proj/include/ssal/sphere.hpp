#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ssal/errors.hpp"
#include "ssal/io.hpp"
#include "ssal/linalg.hpp"
#include "ssal/rng.hpp"
#include "ssal/stats.hpp"

namespace ssal {

// A point on S^{d-1}. Constructors enforce unit norm: inputs are
// renormalized, and a near-zero input is rejected as degenerate.
class UnitVector {
 public:
  explicit UnitVector(Vector coords) : coords_(std::move(coords)) {
    if (coords_.size() < 2) throw ContractViolation("UnitVector: dimension must be >= 2");
    double norm = coords_.norm();
    if (norm <= 1e-12) throw DegenerateProjection("UnitVector: near-zero coordinates");
    if (std::abs(norm - 1.0) > 1e-9) coords_ /= norm;
  }

  const Vector& coords() const { return coords_; }
  Eigen::Index dim() const { return coords_.size(); }

 private:
  Vector coords_;
};

// k orthonormal rows spanning a k-subsphere of S^{d-1}. `ortho_tol` is the
// pairwise inner-product tolerance: exactly constructed bases use 1e-9,
// re-embedded or measured bases may pass a looser tolerance explicitly.
class SubsphereBasis {
 public:
  explicit SubsphereBasis(Matrix rows, double ortho_tol = 1e-9)
      : rows_(std::move(rows)) {
    const Eigen::Index k = rows_.rows(), d = rows_.cols();
    if (k < 1 || k > d) throw ContractViolation("SubsphereBasis: need 1 <= k <= d");
    for (Eigen::Index i = 0; i < k; ++i) {
      if (std::abs(rows_.row(i).norm() - 1.0) > 1e-9)
        throw ContractViolation("SubsphereBasis: row " + std::to_string(i) + " not unit norm");
      for (Eigen::Index j = 0; j < i; ++j) {
        if (std::abs(rows_.row(i).dot(rows_.row(j))) > ortho_tol)
          throw ContractViolation("SubsphereBasis: rows " + std::to_string(i) + "," +
                                  std::to_string(j) + " not orthogonal");
      }
    }
  }

  const Matrix& rows() const { return rows_; }
  Eigen::Index k() const { return rows_.rows(); }
  Eigen::Index d() const { return rows_.cols(); }

 private:
  Matrix rows_;
};

struct BetaFitReport {
  std::size_t sample_count = 0;
  double empirical_mean = 0.0;      // mean of cos^2
  double empirical_mean_cos = 0.0;  // mean of cos, reported alongside
  double theoretical_mean = 0.0;    // k/d
  double ks_statistic = 0.0;
  double p_value = 0.0;
};

// Angle between two unit vectors via the chord: theta = 2 asin(||x-y||/2).
// Mathematically identical to acos of the inner product, but resolves tiny
// angles down to machine precision where acos floors out near 2e-8.
inline double small_angle_between(const UnitVector& x, const UnitVector& y) {
  if (x.dim() != y.dim()) throw ContractViolation("small_angle_between: dimension mismatch");
  double half_chord = 0.5 * (x.coords() - y.coords()).norm();
  return 2.0 * std::asin(std::min(1.0, half_chord));
}

// Angle between two unit vectors; the inner product is clamped to [-1, 1]
// before arccos so floating-point drift cannot produce a domain error.
inline double angular_distance(const UnitVector& x, const UnitVector& y) {
  if (x.dim() != y.dim()) throw ContractViolation("angular_distance: dimension mismatch");
  double c = x.coords().dot(y.coords());
  c = std::min(1.0, std::max(-1.0, c));
  return std::acos(c);
}

// n independent uniform points on S^{d-1} (normalized Gaussian draws).
inline std::vector<UnitVector> sample_uniform_sphere(Eigen::Index d, std::size_t n, Rng& rng) {
  if (d < 2) throw ContractViolation("sample_uniform_sphere: d must be >= 2");
  if (n < 1) throw ContractViolation("sample_uniform_sphere: n must be >= 1");
  std::vector<UnitVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(rng.unit_vector(d));
  return out;
}

// Metric projection onto the subsphere spanned by the basis: the linear
// projection B^T B x renormalized. This is the angular-distance minimizer.
// An input orthogonal to the subspace has no nearest point and raises
// DegenerateProjection; callers decide the fallback.
inline UnitVector project_to_subsphere(const UnitVector& x, const SubsphereBasis& basis) {
  if (x.dim() != basis.d()) throw ContractViolation("project_to_subsphere: dimension mismatch");
  Vector in_plane = basis.rows() * x.coords();          // k
  Vector p = basis.rows().transpose() * in_plane;       // d
  if (p.norm() <= 1e-12)
    throw DegenerateProjection("project_to_subsphere: input orthogonal to subsphere");
  return UnitVector(std::move(p));
}

// Monte-Carlo validator of the projection-energy law: for U uniform on
// S^{d-1} and V its projection onto a random k-subsphere, cos^2(d(U,V))
// follows Beta(k/2, (d-k)/2) with mean k/d. Samples n points, projects
// onto a random orthonormal k-frame, and reports the empirical mean plus a
// Kolmogorov-Smirnov fit against the Beta CDF.
//
// Uses the identity cos(d(U,V)) = ||B u||, so only the k x d frame is
// applied (blockwise) rather than materializing projections.
inline BetaFitReport validate_projection_law(Eigen::Index d, Eigen::Index k, std::size_t n, Rng& rng,
                                       Histogram* histogram = nullptr,
                                       std::size_t bins = 64) {
  if (k < 1 || k >= d) throw ContractViolation("validate_projection_law: need 1 <= k < d");
  if (n < 1000) throw ContractViolation("validate_projection_law: need n >= 1000");

  Rng basis_rng = rng.split("prop31/basis");
  Rng sample_rng = rng.split("prop31/samples");
  Matrix frame = random_orthonormal_rows(k, d, basis_rng);

  std::vector<double> energies;
  energies.reserve(n);
  const std::size_t block = 2048;
  Matrix chunk(static_cast<Eigen::Index>(block), d);
  std::size_t done = 0;
  double sum_cos = 0.0, sum_cos2 = 0.0;
  while (done < n) {
    std::size_t m = std::min(block, n - done);
    for (std::size_t i = 0; i < m; ++i)
      chunk.row(static_cast<Eigen::Index>(i)) = sample_rng.unit_vector(d).transpose();
    Matrix proj = chunk.topRows(static_cast<Eigen::Index>(m)) * frame.transpose();  // m x k
    for (std::size_t i = 0; i < m; ++i) {
      double e = proj.row(static_cast<Eigen::Index>(i)).squaredNorm();
      e = std::min(1.0, e);
      energies.push_back(e);
      sum_cos2 += e;
      sum_cos += std::sqrt(e);
    }
    done += m;
  }

  const double a = static_cast<double>(k) / 2.0;
  const double b = static_cast<double>(d - k) / 2.0;
  BetaFitReport report;
  report.sample_count = n;
  report.empirical_mean = sum_cos2 / static_cast<double>(n);
  report.empirical_mean_cos = sum_cos / static_cast<double>(n);
  report.theoretical_mean = static_cast<double>(k) / static_cast<double>(d);
  if (histogram) *histogram = make_histogram(energies, 0.0, 1.0, bins);
  report.ks_statistic = ks_statistic(
      std::move(energies), [a, b](double t) { return beta_cdf(a, b, t); });
  report.p_value = kolmogorov_p_two_term(report.ks_statistic, n);
  return report;
}

}  // namespace ssal
