#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "ssal/errors.hpp"
#include "ssal/linalg.hpp"

namespace ssal {

struct NelderMeadResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
};

struct NelderMeadOptions {
  int max_iterations = 4000;
  double value_tolerance = 1e-14;  // relative spread of simplex values
  double initial_step = 0.05;      // per-coordinate simplex offset factor
};

// Standard Nelder-Mead simplex descent (reflection 1, expansion 2,
// contraction 0.5, shrink 0.5). Derivative-free; used for the non-smooth
// L1 curve fit. Deterministic for a fixed starting point.
inline NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f,
                                    const Vector& x0,
                                    const NelderMeadOptions& opt = {}) {
  const Eigen::Index n = x0.size();
  if (n < 1) throw ContractViolation("nelder_mead: empty start point");

  std::vector<Vector> pts;
  std::vector<double> vals;
  pts.push_back(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector x = x0;
    x[i] += opt.initial_step * std::max(std::abs(x[i]), 1.0);
    pts.push_back(std::move(x));
  }
  vals.reserve(pts.size());
  for (const auto& p : pts) vals.push_back(f(p));

  std::vector<std::size_t> order(pts.size());
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<Vector> sorted_pts;
    std::vector<double> sorted_vals;
    for (std::size_t idx : order) {
      sorted_pts.push_back(pts[idx]);
      sorted_vals.push_back(vals[idx]);
    }
    pts = std::move(sorted_pts);
    vals = std::move(sorted_vals);

    if (std::abs(vals.back() - vals.front()) <=
        opt.value_tolerance * (std::abs(vals.front()) + opt.value_tolerance))
      break;

    Vector centroid = Vector::Zero(n);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);

    Vector xr = centroid + (centroid - pts.back());
    double fr = f(xr);
    if (fr < vals.front()) {
      Vector xe = centroid + 2.0 * (centroid - pts.back());
      double fe = f(xe);
      if (fe < fr) {
        pts.back() = std::move(xe);
        vals.back() = fe;
      } else {
        pts.back() = std::move(xr);
        vals.back() = fr;
      }
    } else if (fr < vals[vals.size() - 2]) {
      pts.back() = std::move(xr);
      vals.back() = fr;
    } else {
      Vector xc = centroid + 0.5 * (pts.back() - centroid);
      double fc = f(xc);
      if (fc < vals.back()) {
        pts.back() = std::move(xc);
        vals.back() = fc;
      } else {
        for (std::size_t i = 1; i < pts.size(); ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          vals[i] = f(pts[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < vals.size(); ++i)
    if (vals[i] < vals[best]) best = i;
  return NelderMeadResult{pts[best], vals[best], it};
}

// Adam state over a matrix of parameters. Step uses the bias-corrected
// moment estimates; constants are caller-supplied.
struct AdamState {
  Matrix m, v;
  int t = 0;

  AdamState(Eigen::Index rows, Eigen::Index cols)
      : m(Matrix::Zero(rows, cols)), v(Matrix::Zero(rows, cols)) {}

  void step(Matrix& params, const Matrix& grad, double lr, double beta1,
            double beta2, double eps) {
    ++t;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    double c1 = 1.0 - std::pow(beta1, t);
    double c2 = 1.0 - std::pow(beta2, t);
    Matrix m_hat = m / c1;
    Matrix v_hat = v / c2;
    params -= lr * (m_hat.array() / (v_hat.array().sqrt() + eps)).matrix();
  }
};

}  // namespace ssal
