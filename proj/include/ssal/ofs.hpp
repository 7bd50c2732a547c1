#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ssal/errors.hpp"
#include "ssal/linalg.hpp"
#include "ssal/optim.hpp"
#include "ssal/rng.hpp"
#include "ssal/world.hpp"

namespace ssal {

// ============================================================================
// Orthogonal Face Set generator: find k images whose features under a given
// model are mutually orthogonal, by adaptive-moment gradient descent on the
// latent sphere.
//
// Objective (reported): L(Z) = ||W W^T - I_k||_F with W = embed(invert(Z))
// row-wise. The optimizer descends the squared objective: its gradient 4 M W
// vanishes at the optimum, so the adaptive-moment step sizes decay and the
// iterates settle; the plain norm's gradient keeps unit scale near zero and
// stalls the optimizer at a fixed step radius. Same minimizers either way.
// ============================================================================

struct OfsConfig {
  Eigen::Index k = 8;
  double learning_rate = 0.1;
  int max_iters = 100;
  double convergence_tol = 1e-3;  // on the reported (unsquared) loss
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
};

struct OfsResult {
  std::vector<Vector> images;  // k m-vectors
  double final_loss = 0.0;     // ||W W^T - I||_F at the returned iterate
  int iterations = 0;
  double gram_offdiag_max = 0.0;
  std::vector<double> loss_trace;  // reported loss per visited iterate
};

namespace detail {

// Forward pass shared by loss and gradient: rows of z (assumed unit) map to
// images, pre-normalization feature vectors y, and unit features w. The op
// order matches embed() exactly so the objective is the world's own.
struct OfsForward {
  Matrix images;  // k x m
  Matrix y;       // k x d, pre-normalization features
  Matrix w;       // k x d, unit rows
  Vector y_norms;
};

inline OfsForward ofs_forward(const SyntheticWorld& world, const EmbeddingModel& model,
                              const Matrix& z) {
  const Eigen::Index k = z.rows(), d = world.config.d, m = world.config.m;
  OfsForward f;
  f.images.resize(k, m);
  f.y.resize(k, d);
  f.w.resize(k, d);
  f.y_norms.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    Vector img = world.generator_map * (model.q.transpose() * z.row(i).transpose());
    Vector y = model.q * (world.generator_map.transpose() * img);
    if (model.eta > 0.0) y += model.eta * image_noise_unit(model, img, d);
    double n = y.norm();
    if (n <= 1e-12) throw DegenerateProjection("ofs_forward: feature collapsed to zero");
    f.images.row(i) = img.transpose();
    f.y.row(i) = y.transpose();
    f.w.row(i) = (y / n).transpose();
    f.y_norms(i) = n;
  }
  return f;
}

}  // namespace detail

// Reported loss ||W W^T - I||_F at unit-row latents z.
inline double ofs_loss(const SyntheticWorld& world, const EmbeddingModel& model,
                       const Matrix& z) {
  detail::OfsForward f = detail::ofs_forward(world, model, z);
  const Eigen::Index k = z.rows();
  return (f.w * f.w.transpose() - Matrix::Identity(k, k)).norm();
}

// Squared loss ||W W^T - I||_F^2; the quantity the optimizer differentiates.
inline double ofs_squared_loss(const SyntheticWorld& world, const EmbeddingModel& model,
                               const Matrix& z) {
  double l = ofs_loss(world, model, z);
  return l * l;
}

// Analytic gradient of ofs_squared_loss with respect to z (rows unit).
// Chain: z -> zhat -> image -> y = zhat + eta*u -> w = y/||y||, where the
// world's linear maps compose to the identity on features and the noise
// direction u is piecewise constant in z (exact at eta = 0). Row-wise:
//   g_w = 4 (W W^T - I) W
//   g_y = (I - w w^T) g_w / ||y||
//   g_z = (I - zhat zhat^T) g_y / ||z||
inline Matrix ofs_gradient(const SyntheticWorld& world, const EmbeddingModel& model,
                           const Matrix& z) {
  detail::OfsForward f = detail::ofs_forward(world, model, z);
  const Eigen::Index k = z.rows();
  Matrix m_mat = f.w * f.w.transpose() - Matrix::Identity(k, k);
  Matrix g_w = 4.0 * m_mat * f.w;
  Matrix g_z(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < k; ++i) {
    Vector w = f.w.row(i).transpose();
    Vector gw = g_w.row(i).transpose();
    Vector gy = (gw - w * w.dot(gw)) / f.y_norms(i);
    Vector zr = z.row(i).transpose();
    double zn = zr.norm();
    Vector zhat = zr / zn;
    g_z.row(i) = ((gy - zhat * zhat.dot(gy)) / zn).transpose();
  }
  return g_z;
}

inline OfsResult generate_ofs(const SyntheticWorld& world, const EmbeddingModel& model,
                              const OfsConfig& cfg) {
  const Eigen::Index d = world.config.d;
  if (cfg.k < 1 || cfg.k > d) throw ContractViolation("generate_ofs: need 1 <= k <= d");
  if (cfg.learning_rate <= 0.0) throw ContractViolation("generate_ofs: learning_rate must be > 0");
  if (cfg.max_iters < 0) throw ContractViolation("generate_ofs: max_iters must be >= 0");

  Rng rng(cfg.seed);
  Matrix z(cfg.k, d);
  for (Eigen::Index i = 0; i < cfg.k; ++i) z.row(i) = rng.unit_vector(d).transpose();

  AdamState adam(cfg.k, d);
  OfsResult out;
  Matrix best_z = z;
  double best_loss = ofs_loss(world, model, z);
  out.loss_trace.push_back(best_loss);
  int iters = 0;
  // The returned iterate is the best visited one: adaptive-moment steps are
  // not monotone, and the last iterate can sit above an earlier minimum.
  while (best_loss > cfg.convergence_tol && iters < cfg.max_iters) {
    Matrix grad = ofs_gradient(world, model, z);
    adam.step(z, grad, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    for (Eigen::Index i = 0; i < cfg.k; ++i) {
      double n = z.row(i).norm();
      if (n <= 1e-12) throw DegenerateProjection("generate_ofs: latent row collapsed");
      z.row(i) /= n;
    }
    ++iters;
    double loss = ofs_loss(world, model, z);
    out.loss_trace.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best_z = z;
    }
  }

  detail::OfsForward f = detail::ofs_forward(world, model, best_z);
  Matrix gram = f.w * f.w.transpose();
  double offdiag = 0.0;
  for (Eigen::Index i = 0; i < cfg.k; ++i)
    for (Eigen::Index j = 0; j < cfg.k; ++j)
      if (i != j) offdiag = std::max(offdiag, std::abs(gram(i, j)));

  out.iterations = iters;
  out.final_loss = best_loss;
  out.gram_offdiag_max = offdiag;
  out.images.reserve(static_cast<std::size_t>(cfg.k));
  for (Eigen::Index i = 0; i < cfg.k; ++i) out.images.push_back(f.images.row(i).transpose());
  return out;
}

}  // namespace ssal
