#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ssal/errors.hpp"
#include "ssal/optim.hpp"
#include "ssal/rng.hpp"

namespace ssal {

// Parameters of the confidence curve g(s) = L / (1 + exp(-k_s (s - d0))) + b,
// the monotone map between cosine similarity and oracle confidence.
struct SigmoidParams {
  double l_scale = 1.0;   // L
  double slope = 8.0;     // k_s
  double midpoint = 0.0;  // d0
  double offset = 0.0;    // b
};

inline void validate(const SigmoidParams& p) {
  if (!(p.l_scale > 0.0)) throw ContractViolation("SigmoidParams: l_scale must be > 0");
  if (!(p.slope > 0.0)) throw ContractViolation("SigmoidParams: slope must be > 0");
}

inline double sigmoid_eval(const SigmoidParams& p, double s) {
  return p.l_scale / (1.0 + std::exp(-p.slope * (s - p.midpoint))) + p.offset;
}

struct InverseResult {
  double cosine = 0.0;
  bool clamped = false;
};

// Total inverse of g. Confidence is clamped into (b + delta, L + b - delta)
// with delta = 1e-6 L before the closed-form inverse, and the cosine is
// clamped into [-1, 1], so saturated oracle outputs still map to a usable
// score instead of aborting an attack.
inline InverseResult sigmoid_inverse_ex(const SigmoidParams& p, double c) {
  const double delta = 1e-6 * p.l_scale;
  InverseResult out;
  double clamped_c = std::min(p.l_scale + p.offset - delta, std::max(p.offset + delta, c));
  out.clamped = (clamped_c != c);
  double s = p.midpoint - std::log(p.l_scale / (clamped_c - p.offset) - 1.0) / p.slope;
  if (s > 1.0) {
    s = 1.0;
    out.clamped = true;
  } else if (s < -1.0) {
    s = -1.0;
    out.clamped = true;
  }
  out.cosine = s;
  return out;
}

inline double sigmoid_inverse(const SigmoidParams& p, double c) {
  return sigmoid_inverse_ex(p, c).cosine;
}

struct SigmoidFit {
  SigmoidParams params;
  double mae = 0.0;  // residual mean absolute error
};

// L1 fit of the sigmoid to (cosine, confidence) pairs by Nelder-Mead from
// (L=1, b=0, k_s=8, d0=median cosine) with 5 jittered restarts; later
// restarts re-center on the best point found so far. Positivity of L and
// k_s is enforced by penalty.
inline SigmoidFit fit_sigmoid(const std::vector<std::pair<double, double>>& pairs,
                              Rng rng = Rng(0x551)) {
  if (pairs.size() < 20)
    throw ContractViolation("fit_sigmoid: need at least 20 pairs");
  std::vector<double> cosines;
  cosines.reserve(pairs.size());
  double conf_min = pairs[0].second, conf_max = pairs[0].second;
  for (const auto& pr : pairs) {
    cosines.push_back(pr.first);
    conf_min = std::min(conf_min, pr.second);
    conf_max = std::max(conf_max, pr.second);
  }
  std::sort(cosines.begin(), cosines.end());
  double span = cosines.back() - cosines.front();
  if (span < 0.5)
    throw FitError("fit_sigmoid: cosine span below 0.5");
  if (conf_max - conf_min < 1e-9)
    throw FitError("fit_sigmoid: confidences are constant");
  double median = cosines[cosines.size() / 2];

  auto objective = [&pairs](const Vector& x) {
    SigmoidParams p{x[0], x[1], x[2], x[3]};
    if (p.l_scale <= 1e-9 || p.slope <= 1e-9)
      return 1e30 * (1.0 + std::abs(p.l_scale) + std::abs(p.slope));
    double sum = 0.0;
    for (const auto& pr : pairs) sum += std::abs(sigmoid_eval(p, pr.first) - pr.second);
    return sum / static_cast<double>(pairs.size());
  };

  Vector init(4);
  init << 1.0, 8.0, median, 0.0;
  Vector best = init;
  double best_val = objective(init);
  Vector anchor = init;
  for (int restart = 0; restart < 5; ++restart) {
    Vector start = anchor;
    if (restart > 0) {
      start[0] += 0.2 * rng.gaussian();
      start[1] += 2.0 * rng.gaussian();
      start[2] += 0.1 * rng.gaussian();
      start[3] += 0.05 * rng.gaussian();
    }
    NelderMeadResult r = nelder_mead(objective, start);
    if (r.value < best_val) {
      best = r.x;
      best_val = r.value;
      anchor = r.x;
    }
  }

  SigmoidFit fit;
  fit.params = SigmoidParams{best[0], best[1], best[2], best[3]};
  fit.mae = best_val;
  validate(fit.params);
  return fit;
}

// ============================================================================
// Decision thresholds
// ============================================================================

struct ThresholdCriterion {
  enum class Kind { best_accuracy, far_target } kind = Kind::best_accuracy;
  double alpha = 0.0;  // FAR bound, far_target only

  static ThresholdCriterion best_accuracy() { return {Kind::best_accuracy, 0.0}; }
  static ThresholdCriterion far_target(double alpha) { return {Kind::far_target, alpha}; }

  std::string name() const {
    if (kind == Kind::best_accuracy) return "best_accuracy";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "far_%g", alpha);
    return buf;
  }
};

struct ThresholdReport {
  double tau = 0.0;
  ThresholdCriterion criterion;
  double tar = 0.0;
  double far = 0.0;
};

namespace detail {
inline double fraction_at_or_above(const std::vector<double>& sorted, double tau) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), tau);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}
}  // namespace detail

// Threshold selection over genuine/impostor score lists. Candidates are the
// midpoints of consecutive sorted unique scores; acceptance is score >= tau.
//   best_accuracy: maximize (TAR |G| + (1 - FAR) |I|) / (|G| + |I|),
//                  ties broken toward the larger tau.
//   far_target(a): smallest tau with FAR <= a; a sentinel above the max
//                  score (FAR = 0) keeps this always satisfiable.
inline ThresholdReport calibrate_threshold(std::vector<double> genuine,
                                           std::vector<double> impostor,
                                           ThresholdCriterion criterion) {
  if (genuine.empty() || impostor.empty())
    throw ContractViolation("calibrate_threshold: empty score list");
  std::sort(genuine.begin(), genuine.end());
  std::sort(impostor.begin(), impostor.end());

  std::vector<double> uniq;
  uniq.reserve(genuine.size() + impostor.size());
  std::merge(genuine.begin(), genuine.end(), impostor.begin(), impostor.end(),
             std::back_inserter(uniq));
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  std::vector<double> candidates;
  for (std::size_t i = 0; i + 1 < uniq.size(); ++i)
    candidates.push_back(0.5 * (uniq[i] + uniq[i + 1]));
  if (candidates.empty()) candidates.push_back(uniq.front());

  ThresholdReport report;
  report.criterion = criterion;
  const double ng = static_cast<double>(genuine.size());
  const double ni = static_cast<double>(impostor.size());

  if (criterion.kind == ThresholdCriterion::Kind::best_accuracy) {
    double best_acc = -1.0;
    for (double tau : candidates) {
      double tar = detail::fraction_at_or_above(genuine, tau);
      double far = detail::fraction_at_or_above(impostor, tau);
      double acc = (tar * ng + (1.0 - far) * ni) / (ng + ni);
      if (acc >= best_acc) {  // >= so ties prefer the larger tau
        best_acc = acc;
        report.tau = tau;
        report.tar = tar;
        report.far = far;
      }
    }
  } else {
    candidates.push_back(uniq.back() + 1.0);  // FAR = 0 sentinel
    bool found = false;
    for (double tau : candidates) {
      double far = detail::fraction_at_or_above(impostor, tau);
      if (far <= criterion.alpha) {
        report.tau = tau;
        report.tar = detail::fraction_at_or_above(genuine, tau);
        report.far = far;
        found = true;
        break;
      }
    }
    if (!found) throw ContractViolation("calibrate_threshold: unreachable FAR target");
  }
  return report;
}

}  // namespace ssal
