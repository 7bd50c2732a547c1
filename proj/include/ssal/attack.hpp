#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssal/calibration.hpp"
#include "ssal/errors.hpp"
#include "ssal/linalg.hpp"
#include "ssal/rng.hpp"
#include "ssal/sphere.hpp"
#include "ssal/subspace.hpp"
#include "ssal/world.hpp"

namespace ssal {

// ============================================================================
// Attack pipelines over the synthetic world.
//
// white_box:  project the target's feature onto the attributed subsphere via
//             the pseudo-inverse, then invert. Requires the model.
// black_box:  recover the projection coordinates from confidence queries
//             against the basis images, optionally applying the correction
//             matrix R (inverse of the queried pairwise-cosine Gram).
// transfer:   craft white-box on a local surrogate, evaluate elsewhere.
// ============================================================================

struct AttributedBasisImages {
  std::vector<Vector> images;        // k images O_i, each an m-vector
  FeatureMatrix feature_matrix_local;  // A: rows = embed(local_model, O_i)
  std::string source_attribute;
};

enum class AttackMode { white_box, black_box_R, black_box_noR, transfer };

inline const char* attack_mode_name(AttackMode m) {
  switch (m) {
    case AttackMode::white_box: return "white_box";
    case AttackMode::black_box_R: return "black_box_R";
    case AttackMode::black_box_noR: return "black_box_noR";
    case AttackMode::transfer: return "transfer";
  }
  return "unknown";
}

struct AttackResult {
  int target_image_id = -1;
  Vector adversarial_image;  // m-vector; zero if failed
  double target_confidence = 0.0;
  std::map<std::string, bool> accepted_at;  // threshold name -> decision
  bool attribute_ok = false;
  std::uint64_t queries_used = 0;  // crafting queries only
  AttackMode mode = AttackMode::white_box;
  bool failed = false;
  std::uint64_t clamped_scores = 0;  // inverse-sigmoid saturation count
  bool eval_query = false;  // confidence came from one extra evaluation query,
                            // excluded from queries_used
};

// PCA the local-model features of an attributed image set, pull the top-k
// components back to image space, and re-embed them. Re-embedding (rather
// than keeping the raw components) is what the query pipeline needs: A must
// describe the features of the actual basis images O_i.
inline AttributedBasisImages prepare_basis(const SyntheticWorld& world,
                                           const EmbeddingModel& local_model,
                                           const std::string& attribute,
                                           const std::vector<Vector>& dataset,
                                           Eigen::Index k) {
  if (k < 1) throw ContractViolation("prepare_basis: need k >= 1");
  std::vector<UnitVector> features;
  features.reserve(dataset.size());
  for (const Vector& img : dataset) features.push_back(embed(local_model, world, img));
  PcaResult pca = run_pca(features, k);

  std::vector<Vector> images;
  images.reserve(static_cast<std::size_t>(k));
  Matrix a_rows(k, world.config.d);
  for (Eigen::Index i = 0; i < k; ++i) {
    UnitVector component(pca.components.row(i).transpose());
    Vector o = invert(local_model, world, component);
    // Canonicalize the component's sign in image space: largest-magnitude
    // pixel positive. Eigenvector signs are arbitrary per model; pinning
    // them on the shared image representation aligns the bases different
    // models derive from the same dataset.
    Eigen::Index pivot = 0;
    o.cwiseAbs().maxCoeff(&pivot);
    if (o(pivot) < 0.0) o = -o;
    UnitVector re_embedded = embed(local_model, world, o);
    a_rows.row(i) = re_embedded.coords().transpose();
    images.push_back(std::move(o));
  }
  return AttributedBasisImages{std::move(images), FeatureMatrix(std::move(a_rows)), attribute};
}

namespace detail {

inline AttackResult failed_result(int target_id, AttackMode mode, Eigen::Index m) {
  AttackResult r;
  r.target_image_id = target_id;
  r.adversarial_image = Vector::Zero(m);
  r.mode = mode;
  r.failed = true;
  return r;
}

// Evaluate a crafted image against an oracle: one confidence query, flagged
// separately from the crafting budget.
inline void evaluate_result(AttackResult& r, const SyntheticWorld& world,
                            const TargetOracle& oracle, const Vector& target_image,
                            const std::string& attribute) {
  r.target_confidence = query_confidence(oracle, world, target_image, r.adversarial_image);
  r.eval_query = true;
  r.accepted_at["default"] = r.target_confidence >= oracle.threshold_default;
  r.attribute_ok = has_attribute(world, attribute, r.adversarial_image);
}

}  // namespace detail

// ============================================================================
// White-box and transfer
// ============================================================================

inline AttackResult white_box_attack(const SyntheticWorld& world,
                                     const EmbeddingModel& model,
                                     const AttributedBasisImages& basis,
                                     const Vector& target_image, int target_id = -1) {
  AttackResult r;
  r.target_image_id = target_id;
  r.mode = AttackMode::white_box;
  try {
    UnitVector feature = embed(model, world, target_image);
    UnitVector projected = project_pseudo_inverse(feature, basis.feature_matrix_local);
    r.adversarial_image = invert(model, world, projected);
  } catch (const DegenerateProjection&) {
    return detail::failed_result(target_id, AttackMode::white_box, world.config.m);
  }
  // White-box evaluation uses an ephemeral oracle over the same model, so
  // the world's query accounting is untouched (the adversary owns the model).
  TargetOracle self = make_oracle(model, default_oracle_sigmoid(), default_oracle_threshold());
  detail::evaluate_result(r, world, self, target_image, basis.source_attribute);
  return r;
}

inline AttackResult transfer_attack(const SyntheticWorld& world,
                                    const EmbeddingModel& local_model,
                                    const AttributedBasisImages& basis,
                                    const TargetOracle& eval_oracle,
                                    const Vector& target_image, int target_id = -1) {
  AttackResult r;
  r.target_image_id = target_id;
  r.mode = AttackMode::transfer;
  try {
    UnitVector feature = embed(local_model, world, target_image);
    UnitVector projected = project_pseudo_inverse(feature, basis.feature_matrix_local);
    r.adversarial_image = invert(local_model, world, projected);
  } catch (const DegenerateProjection&) {
    return detail::failed_result(target_id, AttackMode::transfer, world.config.m);
  }
  detail::evaluate_result(r, world, eval_oracle, target_image, basis.source_attribute);
  return r;
}

// ============================================================================
// Black-box pre-attack phase (amortized across targets)
//
// 1. Calibration probes: the adversary synthesizes a great-circle family of
//    probe images from its own model (pairwise local cosines sweep [-1, 1]),
//    queries all pairs, and fits the oracle's confidence curve.
// 2. Basis Gram: queries all k^2 basis-image pairs, maps confidences back to
//    cosines with the fitted curve, and inverts the resulting Gram into the
//    correction matrix R.
// ============================================================================

struct PreAttackCalibration {
  SigmoidFit sigmoid_fit;
  CorrectionMatrix correction;
  Matrix queried_cosines;  // k x k, recovered from confidences
  std::uint64_t queries_used = 0;
  std::uint64_t clamped_scores = 0;
};

inline PreAttackCalibration prepare_oracle_calibration(const SyntheticWorld& world,
                                                       const EmbeddingModel& local_model,
                                                       const AttributedBasisImages& basis,
                                                       const TargetOracle& oracle, Rng& rng,
                                                       int n_probes = 16) {
  if (n_probes < 7)
    throw ContractViolation("prepare_oracle_calibration: need >= 7 probes for the fit");
  PreAttackCalibration out;
  const Eigen::Index d = world.config.d;

  // Great-circle probes: features cos(t) u + sin(t) v give pairwise cosines
  // cos(t_i - t_j), covering the curve's full input range.
  Rng probe_rng = rng.split("calibration/probes");
  Matrix frame = random_orthonormal_rows(2, d, probe_rng);
  const double pi = std::acos(-1.0);
  std::vector<Vector> probe_images;
  std::vector<UnitVector> probe_features;
  for (int t = 0; t < n_probes; ++t) {
    double theta = pi * static_cast<double>(t) / static_cast<double>(n_probes - 1);
    Vector f = std::cos(theta) * frame.row(0).transpose() + std::sin(theta) * frame.row(1).transpose();
    Vector img = invert(local_model, world, UnitVector(std::move(f)));
    probe_features.push_back(embed(local_model, world, img));
    probe_images.push_back(std::move(img));
  }

  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < n_probes; ++i) {
    for (int j = i; j < n_probes; ++j) {
      double conf = query_confidence(oracle, world, probe_images[i], probe_images[j]);
      double cosine = std::min(1.0, std::max(-1.0, probe_features[i].coords().dot(
                                                       probe_features[j].coords())));
      pairs.emplace_back(cosine, conf);
      ++out.queries_used;
    }
  }
  out.sigmoid_fit = fit_sigmoid(pairs, rng.split("calibration/fit"));

  const Eigen::Index k = static_cast<Eigen::Index>(basis.images.size());
  Matrix queried(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      double conf = query_confidence(oracle, world, basis.images[i], basis.images[j]);
      InverseResult inv = sigmoid_inverse_ex(out.sigmoid_fit.params, conf);
      queried(i, j) = inv.cosine;
      if (inv.clamped) ++out.clamped_scores;
      ++out.queries_used;
    }
  }
  // A self-pair's cosine is 1 by definition; the fitted inverse of a
  // near-saturated confidence is the noisiest recovery of all, so the known
  // value replaces it rather than polluting the Gram.
  queried.diagonal().setOnes();
  out.queried_cosines = queried;
  out.correction = build_correction_matrix(queried);
  return out;
}

// ============================================================================
// Black-box per-target attack
// ============================================================================

// The per-target query list is a pure function of (basis, target): the k
// pairs (O_i, target). Producing it up front keeps the attack non-adaptive;
// black_box_attack consumes confidences in exactly this order.
struct QueryPlan {
  std::vector<std::pair<Vector, Vector>> pairs;
};

inline QueryPlan make_query_plan(const AttributedBasisImages& basis, const Vector& target_image) {
  QueryPlan plan;
  plan.pairs.reserve(basis.images.size());
  for (const Vector& o : basis.images) plan.pairs.emplace_back(o, target_image);
  return plan;
}

inline AttackResult black_box_attack(const SyntheticWorld& world,
                                     const EmbeddingModel& local_model,
                                     const AttributedBasisImages& basis,
                                     const TargetOracle& oracle,
                                     const PreAttackCalibration& calibration,
                                     const Vector& target_image, bool use_correction,
                                     int target_id = -1, bool evaluate = true) {
  const AttackMode mode = use_correction ? AttackMode::black_box_R : AttackMode::black_box_noR;
  AttackResult r;
  r.target_image_id = target_id;
  r.mode = mode;

  QueryPlan plan = make_query_plan(basis, target_image);
  const Eigen::Index k = static_cast<Eigen::Index>(plan.pairs.size());
  Vector scores(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    double conf = query_confidence(oracle, world, plan.pairs[i].first, plan.pairs[i].second);
    InverseResult inv = sigmoid_inverse_ex(calibration.sigmoid_fit.params, conf);
    scores(i) = inv.cosine;
    if (inv.clamped) ++r.clamped_scores;
    ++r.queries_used;
  }

  Vector weights = use_correction ? Vector(calibration.correction.r_inverse * scores) : scores;
  try {
    UnitVector projected = score_projection(weights, basis.feature_matrix_local);
    r.adversarial_image = invert(local_model, world, projected);
  } catch (const DegenerateProjection&) {
    AttackResult f = detail::failed_result(target_id, mode, world.config.m);
    f.queries_used = r.queries_used;
    f.clamped_scores = r.clamped_scores;
    return f;
  }
  if (evaluate) detail::evaluate_result(r, world, oracle, target_image, basis.source_attribute);
  return r;
}

// ============================================================================
// Universal-basis validator: do per-model attributed bases interpolate
// consistently? For each uniform score vector s, build the interpolant under
// models 0 and 1, embed both under model 2, record their angular distance.
// ============================================================================

enum class BasisVariant { attributed, random_faces, random_vectors };

inline const char* basis_variant_name(BasisVariant v) {
  switch (v) {
    case BasisVariant::attributed: return "attributed";
    case BasisVariant::random_faces: return "random_faces";
    case BasisVariant::random_vectors: return "random_vectors";
  }
  return "unknown";
}

inline std::optional<BasisVariant> parse_basis_variant(const std::string& s) {
  if (s == "attributed") return BasisVariant::attributed;
  if (s == "random_faces") return BasisVariant::random_faces;
  if (s == "random_vectors") return BasisVariant::random_vectors;
  return std::nullopt;
}

struct BasisValidation {
  Histogram histogram;  // angular distances over [0, pi]
  double fraction_under_threshold = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_degenerate = 0;
};

inline BasisValidation validate_universal_basis(const SyntheticWorld& world,
                                                BasisVariant variant, int n_samples,
                                                double threshold_cos, Rng& rng,
                                                Eigen::Index k = 24) {
  if (world.models.size() < 3)
    throw ContractViolation("validate_universal_basis: needs >= 3 models in the world");
  if (n_samples < 0) throw ContractViolation("validate_universal_basis: n_samples < 0");
  const Eigen::Index d = world.config.d;
  const EmbeddingModel& m0 = world.models[0];
  const EmbeddingModel& m1 = world.models[1];
  const EmbeddingModel& m2 = world.models[2];

  // Per-model feature matrices of the two interpolating bases.
  auto embed_rows = [&](const EmbeddingModel& model, const std::vector<Vector>& images) {
    Matrix rows(static_cast<Eigen::Index>(images.size()), d);
    for (std::size_t i = 0; i < images.size(); ++i)
      rows.row(static_cast<Eigen::Index>(i)) = embed(model, world, images[i]).coords().transpose();
    return FeatureMatrix(std::move(rows));
  };

  auto make_bases = [&]() -> std::pair<FeatureMatrix, FeatureMatrix> {
    if (variant == BasisVariant::attributed) {
      const std::string& attr = world.config.attributes.front();
      Rng ds_rng = rng.split("basis/dataset");
      int n_dataset = std::max<int>(200, static_cast<int>(8 * k));
      auto pop = sample_population(world, attr, n_dataset, 1, ds_rng);
      std::vector<Vector> images;
      images.reserve(pop.size());
      for (auto& rec : pop) images.push_back(std::move(rec.image));
      return {prepare_basis(world, m0, attr, images, k).feature_matrix_local,
              prepare_basis(world, m1, attr, images, k).feature_matrix_local};
    }
    if (variant == BasisVariant::random_faces) {
      Rng face_rng = rng.split("basis/faces");
      auto pop = sample_population(world, std::nullopt, static_cast<int>(k), 1, face_rng);
      std::vector<Vector> images;
      images.reserve(pop.size());
      for (auto& rec : pop) images.push_back(std::move(rec.image));
      return {embed_rows(m0, images), embed_rows(m1, images)};
    }
    // Mismatched bases: independent random frames per model, pulled through
    // each model's inverse so the pipeline shape matches the other variants.
    Rng f0 = rng.split("basis/frame/0");
    Rng f1 = rng.split("basis/frame/1");
    Matrix r0 = random_orthonormal_rows(k, d, f0);
    Matrix r1 = random_orthonormal_rows(k, d, f1);
    std::vector<Vector> images0, images1;
    for (Eigen::Index i = 0; i < k; ++i) {
      images0.push_back(invert(m0, world, UnitVector(r0.row(i).transpose())));
      images1.push_back(invert(m1, world, UnitVector(r1.row(i).transpose())));
    }
    return {embed_rows(m0, images0), embed_rows(m1, images1)};
  };
  auto [a0, a1] = make_bases();

  Rng score_rng = rng.split("basis/scores");
  const double pi = std::acos(-1.0);
  std::vector<double> distances;
  distances.reserve(static_cast<std::size_t>(n_samples));
  std::size_t under = 0, degenerate = 0;
  for (int t = 0; t < n_samples; ++t) {
    Vector s(k);
    for (Eigen::Index i = 0; i < k; ++i) s(i) = score_rng.uniform(-1.0, 1.0);
    try {
      UnitVector p0 = score_projection(s, a0);
      UnitVector p1 = score_projection(s, a1);
      UnitVector e0 = embed(m2, world, invert(m0, world, p0));
      UnitVector e1 = embed(m2, world, invert(m1, world, p1));
      double c = std::min(1.0, std::max(-1.0, e0.coords().dot(e1.coords())));
      distances.push_back(std::acos(c));
      if (c >= threshold_cos) ++under;
    } catch (const DegenerateProjection&) {
      ++degenerate;  // counted as a miss
    }
  }

  BasisValidation out;
  out.n_samples = static_cast<std::size_t>(n_samples);
  out.n_degenerate = degenerate;
  out.fraction_under_threshold =
      n_samples > 0 ? static_cast<double>(under) / static_cast<double>(n_samples) : 0.0;
  out.histogram = make_histogram(distances, 0.0, pi, 64);
  return out;
}

}  // namespace ssal
