#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "ssal/errors.hpp"
#include "ssal/io.hpp"
#include "ssal/world.hpp"

namespace ssal {

// ============================================================================
// Experiment configuration: structured text with dotted keys, e.g.
//
//   seed=7
//   world.d=64
//   world.eta_model=0.05
//   attack.mode=black_box
//   attack.k=24
//   attack.n_targets=500
//   thresholds=best_accuracy,far:0.001,default
//   output_dir=out/run1
//
// Threshold specs: "default" (the oracle's shipped threshold),
// "best_accuracy", or "far:<alpha>" (smallest tau with FAR <= alpha on fresh
// genuine/impostor pairs).
// ============================================================================

struct ThresholdSpec {
  enum class Kind { oracle_default, best_accuracy, far_target };
  Kind kind = Kind::oracle_default;
  double alpha = 0.0;

  std::string name() const {
    switch (kind) {
      case Kind::oracle_default: return "default";
      case Kind::best_accuracy: return "best_accuracy";
      case Kind::far_target: {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "far_%g", alpha);
        return buf;
      }
    }
    return "unknown";
  }
};

inline ThresholdSpec parse_threshold_spec(const std::string& s) {
  ThresholdSpec spec;
  if (s == "default") {
    spec.kind = ThresholdSpec::Kind::oracle_default;
  } else if (s == "best_accuracy") {
    spec.kind = ThresholdSpec::Kind::best_accuracy;
  } else if (s.rfind("far:", 0) == 0) {
    spec.kind = ThresholdSpec::Kind::far_target;
    try {
      spec.alpha = std::stod(s.substr(4));
    } catch (const std::exception&) {
      throw ConfigError("bad far threshold spec: " + s);
    }
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
      throw ConfigError("far threshold alpha must be in (0,1): " + s);
  } else {
    throw ConfigError("unknown threshold spec: " + s);
  }
  return spec;
}

inline std::vector<ThresholdSpec> parse_threshold_list(const std::string& csv) {
  std::vector<ThresholdSpec> specs;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    auto comma = csv.find(',', pos);
    std::string item =
        csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) specs.push_back(parse_threshold_spec(item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (specs.empty()) throw ConfigError("threshold list is empty");
  return specs;
}

struct AttackConfig {
  std::string mode = "black_box";  // white_box | black_box | transfer
  Eigen::Index k = 24;
  std::string attribute = "f";
  bool use_correction = true;
  int n_targets = 100;
};

struct ExperimentConfig {
  WorldConfig world;
  AttackConfig attack;
  std::vector<ThresholdSpec> thresholds = {ThresholdSpec{ThresholdSpec::Kind::best_accuracy, 0.0}};
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  bool world_seed_explicit = false;  // set when world.seed came from the config
};

inline void validate(const ExperimentConfig& cfg) {
  validate(cfg.world);
  if (cfg.attack.n_targets < 1) throw ConfigError("attack.n_targets must be >= 1");
  if (cfg.attack.k < 1 || cfg.attack.k > cfg.world.d)
    throw ConfigError("attack.k must satisfy 1 <= k <= world.d");
  if (cfg.attack.mode != "white_box" && cfg.attack.mode != "black_box" &&
      cfg.attack.mode != "transfer")
    throw ConfigError("attack.mode must be white_box, black_box, or transfer");
  bool found = false;
  for (const auto& a : cfg.world.attributes) found = found || a == cfg.attack.attribute;
  if (!found) throw ConfigError("attack.attribute not present in world.attributes");
  if (cfg.thresholds.empty()) throw ConfigError("at least one threshold required");
}

inline ExperimentConfig parse_experiment_config(const KvFile& kv) {
  ExperimentConfig cfg;
  if (kv.has("seed")) cfg.seed = kv.get_u64("seed");
  if (kv.has("world.d")) cfg.world.d = kv.get_int("world.d");
  if (kv.has("world.m")) cfg.world.m = kv.get_int("world.m");
  if (kv.has("world.k_f")) cfg.world.k_f = kv.get_int("world.k_f");
  if (kv.has("world.sigma_id")) cfg.world.sigma_id = kv.get_double("world.sigma_id");
  if (kv.has("world.eta_model")) cfg.world.eta_model = kv.get_double("world.eta_model");
  if (kv.has("world.n_models")) cfg.world.n_models = static_cast<int>(kv.get_int("world.n_models"));
  if (kv.has("world.rho")) cfg.world.rho = kv.get_double("world.rho");
  if (kv.has("world.seed")) {
    cfg.world.seed = kv.get_u64("world.seed");
    cfg.world_seed_explicit = true;
  }
  if (kv.has("world.attributes")) {
    cfg.world.attributes.clear();
    std::string attrs = kv.get("world.attributes");
    std::size_t pos = 0;
    while (pos <= attrs.size()) {
      auto comma = attrs.find(',', pos);
      std::string name =
          attrs.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!name.empty()) cfg.world.attributes.push_back(name);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  if (kv.has("attack.mode")) cfg.attack.mode = kv.get("attack.mode");
  if (kv.has("attack.k")) cfg.attack.k = kv.get_int("attack.k");
  if (kv.has("attack.attribute")) cfg.attack.attribute = kv.get("attack.attribute");
  if (kv.has("attack.use_correction")) {
    std::string v = kv.get("attack.use_correction");
    if (v == "true" || v == "1")
      cfg.attack.use_correction = true;
    else if (v == "false" || v == "0")
      cfg.attack.use_correction = false;
    else
      throw ConfigError("attack.use_correction must be true/false");
  }
  if (kv.has("attack.n_targets"))
    cfg.attack.n_targets = static_cast<int>(kv.get_int("attack.n_targets"));
  if (kv.has("thresholds")) cfg.thresholds = parse_threshold_list(kv.get("thresholds"));
  if (kv.has("output_dir")) cfg.output_dir = kv.get("output_dir");
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_kv(path));
}

}  // namespace ssal
