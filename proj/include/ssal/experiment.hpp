#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "ssal/attack.hpp"
#include "ssal/config.hpp"
#include "ssal/errors.hpp"
#include "ssal/metrics.hpp"
#include "ssal/world.hpp"

namespace ssal {

// ============================================================================
// Experiment orchestration. All randomness descends from cfg.seed through
// labelled splits:
//
//   experiment/world        world construction seed (unless world.seed given)
//   experiment/basis        attributed dataset for the basis PCA
//   experiment/calibration  probe queries + sigmoid fit restarts
//   experiment/pairs        genuine/impostor pairs for threshold calibration
//   experiment/targets      target sampling
//
// Adding a consumer never perturbs existing streams. Per-target attacks are
// pure functions of pre-drawn data, so results are independent of the worker
// thread count.
// ============================================================================

inline int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("SSAL_THREADS")) {
    try {
      int v = std::stoi(env);
      if (v >= 1) return std::min(v, hw);
    } catch (const std::exception&) {
      throw ConfigError("SSAL_THREADS must be a positive integer");
    }
    throw ConfigError("SSAL_THREADS must be a positive integer");
  }
  return 1;
}

template <typename F>
void parallel_for(std::size_t n, F&& body) {
  int workers = std::min<std::size_t>(static_cast<std::size_t>(thread_budget()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct ResolvedThreshold {
  std::string name;
  double tau = 0.0;
  double tar = 0.0;  // on the calibration pairs; NaN-free (0 for "default")
  double far = 0.0;
};

struct ExperimentOutcome {
  std::uint64_t world_fingerprint = 0;
  std::vector<AttackResult> results;
  std::vector<ResolvedThreshold> thresholds;
  std::vector<MetricSummary> summaries;
  std::uint64_t crafting_queries = 0;     // per-target query total
  std::uint64_t amortized_queries = 0;    // pre-attack probe + basis queries
};

namespace detail {

inline nlohmann::json result_to_json(const AttackResult& r) {
  nlohmann::json j;
  j["accepted_at"] = r.accepted_at;
  j["attribute_ok"] = r.attribute_ok;
  j["clamped_scores"] = r.clamped_scores;
  j["eval_query"] = r.eval_query;
  j["failed"] = r.failed;
  j["mode"] = attack_mode_name(r.mode);
  j["queries_used"] = r.queries_used;
  j["target_confidence"] = r.target_confidence;
  j["target_image_id"] = r.target_image_id;
  return j;
}

}  // namespace detail

inline void write_results_jsonl(const std::filesystem::path& path,
                                const std::vector<AttackResult>& results,
                                std::uint64_t fingerprint) {
  std::ofstream out(path);
  if (!out) throw IoError("write_results_jsonl: cannot open " + path.string());
  for (const AttackResult& r : results) {
    nlohmann::json j = detail::result_to_json(r);
    j["world_fingerprint"] = fingerprint;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("write_results_jsonl: short write to " + path.string());
}

// Calibrates the configured thresholds from fresh genuine/impostor pairs
// queried against the oracle.
inline std::vector<ResolvedThreshold> resolve_thresholds(
    const SyntheticWorld& world, const TargetOracle& oracle,
    const std::vector<ThresholdSpec>& specs, Rng& rng, int n_pairs = 200) {
  bool needs_pairs = false;
  for (const auto& s : specs) needs_pairs |= s.kind != ThresholdSpec::Kind::oracle_default;

  std::vector<double> genuine, impostor;
  if (needs_pairs) {
    auto pop = sample_population(world, std::nullopt, n_pairs, 2, rng);
    for (int i = 0; i < n_pairs; ++i) {
      const Vector& a = pop[static_cast<std::size_t>(2 * i)].image;
      const Vector& b = pop[static_cast<std::size_t>(2 * i + 1)].image;
      genuine.push_back(query_confidence(oracle, world, a, b));
      const Vector& c = pop[static_cast<std::size_t>((2 * i + 2) % (2 * n_pairs))].image;
      impostor.push_back(query_confidence(oracle, world, a, c));
    }
  }

  std::vector<ResolvedThreshold> out;
  for (const ThresholdSpec& spec : specs) {
    ResolvedThreshold rt;
    rt.name = spec.name();
    if (spec.kind == ThresholdSpec::Kind::oracle_default) {
      rt.tau = oracle.threshold_default;
      rt.tar = 0.0;
      rt.far = 0.0;
    } else {
      ThresholdCriterion crit;
      crit.kind = spec.kind == ThresholdSpec::Kind::best_accuracy
                      ? ThresholdCriterion::Kind::best_accuracy
                      : ThresholdCriterion::Kind::far_target;
      crit.alpha = spec.alpha;
      ThresholdReport rep = calibrate_threshold(genuine, impostor, crit);
      rt.tau = rep.tau;
      rt.tar = rep.tar;
      rt.far = rep.far;
    }
    out.push_back(std::move(rt));
  }
  return out;
}

inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  validate(cfg);
  if (!cfg.world_seed_explicit)
    cfg.world.seed = splitmix64(cfg.seed ^ fnv1a64("experiment/world"));

  SyntheticWorld world = build_world(cfg.world);
  Rng root(cfg.seed);
  const EmbeddingModel& local = world.models.front();
  const TargetOracle& oracle = world.target;

  // Basis from an attributed dataset. White-box attacks own the target's
  // model and craft on it; black-box and transfer craft on the surrogate.
  const EmbeddingModel& craft_model =
      cfg.attack.mode == "white_box" ? oracle.model : local;
  Rng basis_rng = root.split("experiment/basis");
  int n_dataset = std::max<int>(200, static_cast<int>(8 * cfg.attack.k));
  std::vector<Vector> dataset;
  {
    auto pop = sample_population(world, cfg.attack.attribute, n_dataset, 1, basis_rng);
    dataset.reserve(pop.size());
    for (auto& rec : pop) dataset.push_back(std::move(rec.image));
  }
  AttributedBasisImages basis =
      prepare_basis(world, craft_model, cfg.attack.attribute, dataset, cfg.attack.k);

  // Pre-attack calibration (needed for black_box; cheap enough to skip
  // entirely otherwise).
  std::optional<PreAttackCalibration> calibration;
  if (cfg.attack.mode == "black_box") {
    Rng calib_rng = root.split("experiment/calibration");
    calibration = prepare_oracle_calibration(world, local, basis, oracle, calib_rng);
  }

  Rng pair_rng = root.split("experiment/pairs");
  std::vector<ResolvedThreshold> thresholds =
      resolve_thresholds(world, oracle, cfg.thresholds, pair_rng);

  // Attribute-negative targets: the population sampler's rejection branch.
  Rng target_rng = root.split("experiment/targets");
  auto targets = sample_population(world, std::nullopt, cfg.attack.n_targets, 1, target_rng);

  std::vector<AttackResult> results(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    const Vector& img = targets[i].image;
    int id = static_cast<int>(i);
    if (cfg.attack.mode == "white_box") {
      results[i] = white_box_attack(world, craft_model, basis, img, id);
    } else if (cfg.attack.mode == "black_box") {
      results[i] = black_box_attack(world, local, basis, oracle, *calibration, img,
                                    cfg.attack.use_correction, id);
    } else {
      results[i] = transfer_attack(world, local, basis, oracle, img, id);
    }
  });

  for (const ResolvedThreshold& rt : thresholds) apply_threshold(results, rt.name, rt.tau);

  ExperimentOutcome out;
  out.world_fingerprint = world.fingerprint;
  out.thresholds = thresholds;
  for (const AttackResult& r : results) out.crafting_queries += r.queries_used;
  if (calibration) out.amortized_queries = calibration->queries_used;

  std::string mode_name = cfg.attack.mode;
  if (cfg.attack.mode == "black_box")
    mode_name = cfg.attack.use_correction ? "black_box_R" : "black_box_noR";
  for (const ResolvedThreshold& rt : thresholds) {
    MetricSummary s;
    s.mode = mode_name;
    s.attribute = cfg.attack.attribute;
    s.k = cfg.attack.k;
    s.d = cfg.world.d;
    s.eta = cfg.world.eta_model;
    s.tau_name = rt.name;
    s.tau = rt.tau;
    s.asr = compute_asr(results, rt.name);
    s.imr = compute_imr(results, rt.name);
    s.n_targets = static_cast<int>(results.size());
    s.seed = cfg.seed;
    s.world_fingerprint = world.fingerprint;
    out.summaries.push_back(std::move(s));
  }
  out.results = std::move(results);
  return out;
}

// Writes results.jsonl, summary.csv, and the world directory under
// cfg.output_dir; returns the outcome.
inline ExperimentOutcome run_experiment_to_dir(const ExperimentConfig& cfg) {
  ExperimentOutcome out = run_experiment(cfg);
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  write_results_jsonl(cfg.output_dir / "results.jsonl", out.results, out.world_fingerprint);
  write_summary_csv(cfg.output_dir / "summary.csv", out.summaries, out.world_fingerprint);
  return out;
}

}  // namespace ssal
