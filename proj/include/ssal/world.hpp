#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssal/calibration.hpp"
#include "ssal/errors.hpp"
#include "ssal/io.hpp"
#include "ssal/linalg.hpp"
#include "ssal/rng.hpp"
#include "ssal/sphere.hpp"

namespace ssal {

// ============================================================================
// The synthetic face-recognition world.
//
// Construction: a shared latent sphere S^{d-1}, a generator with orthonormal
// columns mapping latents to "images" in R^m (m >= d), per-model orthogonal
// rotations q of the latent space, and deterministic per-image embedding
// noise of scale eta. Under this world every embedding model shares the
// same feature geometry up to rotation, so cross-model attack algebra is
// exactly checkable, and raising eta degrades it continuously.
// ============================================================================

struct WorldConfig {
  Eigen::Index d = 64;    // latent / feature dimension
  Eigen::Index m = 128;   // image dimension, m >= d
  Eigen::Index k_f = 16;  // attribute subspace dimension
  double sigma_id = 0.02;   // within-identity angular jitter scale
  double eta_model = 0.05;  // per-model embedding noise scale
  int n_models = 3;
  std::uint64_t seed = 1;
  double rho = 0.5;  // attribute energy threshold
  std::vector<std::string> attributes = {"f"};
};

inline void validate(const WorldConfig& cfg) {
  if (!(2 <= cfg.k_f && cfg.k_f <= cfg.d && cfg.d <= cfg.m))
    throw ContractViolation("WorldConfig: need 2 <= k_f <= d <= m");
  if (cfg.sigma_id < 0.0 || cfg.eta_model < 0.0)
    throw ContractViolation("WorldConfig: noise scales must be >= 0");
  if (cfg.n_models < 1) throw ContractViolation("WorldConfig: need n_models >= 1");
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0))
    throw ContractViolation("WorldConfig: rho must be in (0, 1)");
  if (cfg.attributes.empty())
    throw ContractViolation("WorldConfig: need at least one attribute");
}

inline std::string canonical_string(const WorldConfig& cfg) {
  std::string s = "ssal-world-v1|d=" + std::to_string(cfg.d) +
                  "|m=" + std::to_string(cfg.m) + "|k_f=" + std::to_string(cfg.k_f) +
                  "|sigma_id=" + format_double(cfg.sigma_id) +
                  "|eta_model=" + format_double(cfg.eta_model) +
                  "|n_models=" + std::to_string(cfg.n_models) +
                  "|seed=" + std::to_string(cfg.seed) +
                  "|rho=" + format_double(cfg.rho) + "|attributes=";
  for (std::size_t i = 0; i < cfg.attributes.size(); ++i) {
    if (i) s += ",";
    s += cfg.attributes[i];
  }
  return s;
}

inline std::uint64_t config_fingerprint(const WorldConfig& cfg) {
  return fnv1a64(canonical_string(cfg));
}

// One embedding model F: images -> S^{d-1}, realized as a rotation of the
// shared latent space plus deterministic per-image noise.
struct EmbeddingModel {
  Matrix q;  // d x d orthogonal
  double eta = 0.0;
  std::uint64_t noise_seed = 0;
};

// The queryable face-recognition service: an embedding model behind a
// confidence sigmoid. query_counter is the only mutable piece of the world
// and is shared/atomic so concurrent per-target attacks account correctly.
struct TargetOracle {
  EmbeddingModel model;
  SigmoidParams sigmoid;
  double threshold_default = 0.5;
  std::shared_ptr<std::atomic<std::uint64_t>> query_counter =
      std::make_shared<std::atomic<std::uint64_t>>(0);
};

inline TargetOracle make_oracle(EmbeddingModel model, SigmoidParams sigmoid,
                                double threshold_default) {
  TargetOracle o;
  o.model = std::move(model);
  o.sigmoid = sigmoid;
  o.threshold_default = threshold_default;
  return o;
}

struct SyntheticWorld {
  WorldConfig config;
  std::uint64_t fingerprint = 0;
  Matrix generator_map;  // m x d, orthonormal columns
  std::map<std::string, SubsphereBasis> attribute_subspaces;
  std::vector<EmbeddingModel> models;
  TargetOracle target;
};

// Default confidence curve and decision threshold of the synthetic oracle.
// The threshold sits at the confidence of cosine 0.3420 (the 70-degree
// operating point used throughout the validation suites).
inline SigmoidParams default_oracle_sigmoid() { return SigmoidParams{1.0, 8.0, 0.3, 0.0}; }
inline double default_oracle_threshold() {
  return sigmoid_eval(default_oracle_sigmoid(), 0.3420);
}

// Deterministic world construction. Every random component draws from a
// child stream keyed by a fixed label, so worlds are bit-identical under a
// seed and adding components never perturbs existing ones.
inline SyntheticWorld build_world(const WorldConfig& cfg) {
  validate(cfg);
  SyntheticWorld w;
  w.config = cfg;
  w.fingerprint = config_fingerprint(cfg);
  Rng root(cfg.seed);

  {
    Rng r = root.split("world/generator");
    Matrix cols = random_orthonormal_rows(cfg.d, cfg.m, r);  // d x m orthonormal rows
    w.generator_map = cols.transpose();                      // m x d orthonormal columns
  }

  for (int i = 0; i < cfg.n_models; ++i) {
    Rng r = root.split("world/model/" + std::to_string(i));
    EmbeddingModel model;
    model.q = random_orthonormal_rows(cfg.d, cfg.d, r);
    model.eta = cfg.eta_model;
    model.noise_seed = splitmix64(cfg.seed ^ fnv1a64("world/noise/" + std::to_string(i)));
    w.models.push_back(std::move(model));
  }

  {
    Rng r = root.split("world/model/target");
    EmbeddingModel model;
    model.q = random_orthonormal_rows(cfg.d, cfg.d, r);
    model.eta = cfg.eta_model;
    model.noise_seed = splitmix64(cfg.seed ^ fnv1a64("world/noise/target"));
    w.target = make_oracle(std::move(model), default_oracle_sigmoid(),
                           default_oracle_threshold());
  }

  for (const std::string& name : cfg.attributes) {
    Rng r = root.split("world/attr/" + name);
    w.attribute_subspaces.emplace(name,
                                  SubsphereBasis(random_orthonormal_rows(cfg.k_f, cfg.d, r)));
  }
  return w;
}

// ============================================================================
// Embedding, inversion, querying
// ============================================================================

// Deterministic per-image noise direction: unit d-vector seeded by
// hash(image bytes) XOR model noise seed. Repeated embedding of the same
// image under the same model is bit-identical, like a real API.
inline Vector image_noise_unit(const EmbeddingModel& model, const Vector& image,
                               Eigen::Index d) {
  std::uint64_t h = fnv1a64(image.data(), static_cast<std::size_t>(image.size()));
  Rng r(splitmix64(h ^ model.noise_seed));
  return r.unit_vector(d);
}

// F(image) = normalize(q G^T image + eta * noise(image)).
inline UnitVector embed(const EmbeddingModel& model, const SyntheticWorld& world,
                        const Vector& image) {
  if (image.size() != world.config.m) throw ContractViolation("embed: image dimension mismatch");
  Vector z = world.generator_map.transpose() * image;  // d
  Vector y = model.q * z;
  if (model.eta > 0.0) y += model.eta * image_noise_unit(model, image, world.config.d);
  return UnitVector(std::move(y));
}

// F^-1(v) = G q^T v. With eta = 0 this is an exact right inverse of embed.
inline Vector invert(const EmbeddingModel& model, const SyntheticWorld& world,
                     const UnitVector& v) {
  if (v.dim() != world.config.d) throw ContractViolation("invert: feature dimension mismatch");
  return world.generator_map * (model.q.transpose() * v.coords());
}

// T(img1, img2) = g(<F(img1), F(img2)>). Increments the query counter.
inline double query_confidence(const TargetOracle& oracle, const SyntheticWorld& world,
                               const Vector& img1, const Vector& img2) {
  UnitVector e1 = embed(oracle.model, world, img1);
  UnitVector e2 = embed(oracle.model, world, img2);
  double c = std::min(1.0, std::max(-1.0, e1.coords().dot(e2.coords())));
  oracle.query_counter->fetch_add(1, std::memory_order_relaxed);
  return sigmoid_eval(oracle.sigmoid, c);
}

// Attribute oracle: projection energy of the image's normalized latent
// onto the attribute subspace, thresholded at rho.
inline bool has_attribute(const SyntheticWorld& world, const std::string& attribute,
                          const Vector& image) {
  auto it = world.attribute_subspaces.find(attribute);
  if (it == world.attribute_subspaces.end())
    throw ContractViolation("has_attribute: unknown attribute " + attribute);
  Vector z = world.generator_map.transpose() * image;
  double norm = z.norm();
  if (norm <= 1e-12) return false;
  z /= norm;
  double energy = (it->second.rows() * z).squaredNorm();
  return energy >= world.config.rho;
}

// ============================================================================
// Population sampling
// ============================================================================

struct PopulationRecord {
  int identity_id = 0;
  Vector image;       // m
  UnitVector latent;  // the per-image latent the image was generated from
};

namespace detail {
inline double attribute_energy(const SubsphereBasis& basis, const Vector& unit_latent) {
  return (basis.rows() * unit_latent).squaredNorm();
}
}  // namespace detail

// Samples identities and their images.
//
//   attribute = name: identity latents are normalize(P_V z0 + 0.05 n) with
//     z0, n uniform on the sphere, so they lie near the attribute subsphere.
//   attribute = none: identity latents are uniform, and identities positive
//     for ANY world attribute (energy >= rho) are rejected, producing an
//     attribute-negative population.
//
// Each image is generator_map * normalize(identity + sigma_id * u) with u a
// uniform unit direction (the within-identity jitter); sigma_id = 0 makes
// image = generator_map * identity exactly.
inline std::vector<PopulationRecord> sample_population(
    const SyntheticWorld& world, const std::optional<std::string>& attribute,
    int n_identities, int images_per_identity, Rng& rng) {
  if (n_identities < 1 || images_per_identity < 1)
    throw ContractViolation("sample_population: counts must be >= 1");
  const Eigen::Index d = world.config.d;
  const SubsphereBasis* basis = nullptr;
  if (attribute) {
    auto it = world.attribute_subspaces.find(*attribute);
    if (it == world.attribute_subspaces.end())
      throw ContractViolation("sample_population: unknown attribute " + *attribute);
    basis = &it->second;
  }

  std::vector<PopulationRecord> out;
  out.reserve(static_cast<std::size_t>(n_identities) *
              static_cast<std::size_t>(images_per_identity));
  const long draw_cap = 100l * n_identities;
  long draws = 0;
  for (int id = 0; id < n_identities; ++id) {
    Vector identity;
    if (basis) {
      Vector z0 = rng.unit_vector(d);
      Vector noise = rng.unit_vector(d);
      Vector p = basis->rows().transpose() * (basis->rows() * z0) + 0.05 * noise;
      identity = UnitVector(std::move(p)).coords();
      ++draws;
    } else {
      for (;;) {
        if (++draws > draw_cap)
          throw ConfigError("sample_population: rejection cap hit; attribute subspace too large for d");
        Vector z = rng.unit_vector(d);
        bool positive = false;
        for (const auto& [name, attr_basis] : world.attribute_subspaces) {
          if (detail::attribute_energy(attr_basis, z) >= world.config.rho) {
            positive = true;
            break;
          }
        }
        if (!positive) {
          identity = std::move(z);
          break;
        }
      }
    }

    for (int j = 0; j < images_per_identity; ++j) {
      Vector latent = identity;
      if (world.config.sigma_id > 0.0) {
        latent += world.config.sigma_id * rng.unit_vector(d);
        latent /= latent.norm();
      }
      PopulationRecord rec{id, world.generator_map * latent, UnitVector(latent)};
      out.push_back(std::move(rec));
    }
  }
  return out;
}

// ============================================================================
// Serialization: structured-text header + binary matrices. Worlds rebuild
// deterministically from the header; the matrices are written for external
// inspection and integrity-checked on load.
// ============================================================================

inline void save_world(const std::filesystem::path& dir, const SyntheticWorld& w) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  KvFile kv;
  kv.set("format", "ssal-world-v1");
  kv.set("d", std::to_string(w.config.d));
  kv.set("m", std::to_string(w.config.m));
  kv.set("k_f", std::to_string(w.config.k_f));
  kv.set("sigma_id", format_double(w.config.sigma_id));
  kv.set("eta_model", format_double(w.config.eta_model));
  kv.set("n_models", std::to_string(w.config.n_models));
  kv.set("seed", std::to_string(w.config.seed));
  kv.set("rho", format_double(w.config.rho));
  std::string attrs;
  for (std::size_t i = 0; i < w.config.attributes.size(); ++i) {
    if (i) attrs += ",";
    attrs += w.config.attributes[i];
  }
  kv.set("attributes", attrs);
  kv.set("fingerprint", std::to_string(w.fingerprint));
  write_kv(dir / "world.txt", kv);

  write_matrix(dir / "generator_map.mat", w.generator_map, w.fingerprint);
  for (std::size_t i = 0; i < w.models.size(); ++i)
    write_matrix(dir / ("model_" + std::to_string(i) + "_q.mat"), w.models[i].q, w.fingerprint);
  write_matrix(dir / "target_q.mat", w.target.model.q, w.fingerprint);
  for (const auto& [name, basis] : w.attribute_subspaces)
    write_matrix(dir / ("attr_" + name + ".mat"), basis.rows(), w.fingerprint);
}

inline WorldConfig parse_world_config(const KvFile& kv) {
  WorldConfig cfg;
  cfg.d = kv.get_int("d");
  cfg.m = kv.get_int("m");
  cfg.k_f = kv.get_int("k_f");
  cfg.sigma_id = kv.get_double("sigma_id");
  cfg.eta_model = kv.get_double("eta_model");
  cfg.n_models = static_cast<int>(kv.get_int("n_models"));
  cfg.seed = kv.get_u64("seed");
  cfg.rho = kv.get_double("rho");
  cfg.attributes.clear();
  std::string attrs = kv.get("attributes");
  std::size_t pos = 0;
  while (pos <= attrs.size() && !attrs.empty()) {
    auto comma = attrs.find(',', pos);
    std::string name = attrs.substr(pos, comma == std::string::npos ? attrs.size() - pos
                                                                    : comma - pos);
    if (!name.empty()) cfg.attributes.push_back(name);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return cfg;
}

inline SyntheticWorld load_world(const std::filesystem::path& dir) {
  KvFile kv = read_kv(dir / "world.txt");
  if (kv.get_or("format", "") != "ssal-world-v1")
    throw IoError("load_world: unrecognized world format");
  WorldConfig cfg = parse_world_config(kv);
  SyntheticWorld w = build_world(cfg);
  if (std::to_string(w.fingerprint) != kv.get("fingerprint"))
    throw IoError("load_world: fingerprint mismatch; header edited or version skew");
  Matrix gen = read_matrix(dir / "generator_map.mat");
  if (gen.rows() != w.generator_map.rows() || gen.cols() != w.generator_map.cols() ||
      (gen - w.generator_map).cwiseAbs().maxCoeff() > 0.0)
    throw IoError("load_world: generator matrix does not match rebuilt world");
  return w;
}

}  // namespace ssal
