#include <cmath>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "ssal/calibration.hpp"

namespace {

using ssal::SigmoidParams;

TEST(SigmoidEval, MidpointAndSaturation) {
  SigmoidParams p{1.0, 8.0, 0.3, 0.0};
  EXPECT_NEAR(ssal::sigmoid_eval(p, 0.3), 0.5, 1e-15);
  EXPECT_LT(ssal::sigmoid_eval(p, -1.0), 0.01);
  EXPECT_GT(ssal::sigmoid_eval(p, 1.0), 0.99);
  double prev = -1.0;
  for (double s = -1.0; s <= 1.0; s += 0.05) {
    double c = ssal::sigmoid_eval(p, s);
    EXPECT_GT(c, prev);
    prev = c;
  }
}

TEST(SigmoidParamsValidation, PositivityContracts) {
  EXPECT_THROW(ssal::validate(SigmoidParams{0.0, 8.0, 0.3, 0.0}), ssal::ContractViolation);
  EXPECT_THROW(ssal::validate(SigmoidParams{1.0, -2.0, 0.3, 0.0}), ssal::ContractViolation);
  EXPECT_NO_THROW(ssal::validate(SigmoidParams{1.0, 8.0, 0.3, 0.0}));
}

TEST(SigmoidInverse, RoundTripInsideTheOpenRange) {
  SigmoidParams p{0.9, 6.0, 0.25, 0.05};
  for (double s = -0.95; s <= 0.95; s += 0.05) {
    double c = ssal::sigmoid_eval(p, s);
    ssal::InverseResult inv = ssal::sigmoid_inverse_ex(p, c);
    EXPECT_FALSE(inv.clamped);
    EXPECT_NEAR(inv.cosine, s, 1e-9);
  }
}

TEST(SigmoidInverse, TotalOnSaturatedConfidences) {
  SigmoidParams p{1.0, 8.0, 0.3, 0.0};
  for (double c : {-0.5, 0.0, 1.0, 1.5, 2.0}) {
    ssal::InverseResult inv = ssal::sigmoid_inverse_ex(p, c);
    EXPECT_TRUE(std::isfinite(inv.cosine));
    EXPECT_GE(inv.cosine, -1.0);
    EXPECT_LE(inv.cosine, 1.0);
  }
  EXPECT_TRUE(ssal::sigmoid_inverse_ex(p, 0.0).clamped);
  EXPECT_TRUE(ssal::sigmoid_inverse_ex(p, 1.0).clamped);
  EXPECT_EQ(ssal::sigmoid_inverse_ex(p, 1.0).cosine, 1.0);
  EXPECT_FALSE(ssal::sigmoid_inverse_ex(p, 0.5).clamped);
  EXPECT_DOUBLE_EQ(ssal::sigmoid_inverse(p, 0.5), ssal::sigmoid_inverse_ex(p, 0.5).cosine);
}

std::vector<std::pair<double, double>> noiseless_pairs(const SigmoidParams& p, int n) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < n; ++i) {
    double s = -1.0 + 2.0 * i / (n - 1);
    pairs.emplace_back(s, ssal::sigmoid_eval(p, s));
  }
  return pairs;
}

TEST(FitSigmoid, RecoversNoiselessCurve) {
  SigmoidParams truth{0.9, 6.0, 0.25, 0.05};
  ssal::SigmoidFit fit = ssal::fit_sigmoid(noiseless_pairs(truth, 60));
  EXPECT_LT(fit.mae, 1e-4);
  double sup = 0.0;
  for (double s = -1.0; s <= 1.0; s += 0.01) {
    sup = std::max(sup, std::abs(ssal::sigmoid_eval(fit.params, s) - ssal::sigmoid_eval(truth, s)));
  }
  EXPECT_LT(sup, 1e-3);
}

TEST(FitSigmoid, DeterministicForFixedSeed) {
  SigmoidParams truth{1.0, 8.0, 0.3, 0.0};
  auto pairs = noiseless_pairs(truth, 40);
  ssal::SigmoidFit a = ssal::fit_sigmoid(pairs, ssal::Rng(7));
  ssal::SigmoidFit b = ssal::fit_sigmoid(pairs, ssal::Rng(7));
  EXPECT_EQ(a.params.l_scale, b.params.l_scale);
  EXPECT_EQ(a.params.slope, b.params.slope);
  EXPECT_EQ(a.params.midpoint, b.params.midpoint);
  EXPECT_EQ(a.params.offset, b.params.offset);
}

TEST(FitSigmoid, ErrorTaxonomy) {
  SigmoidParams truth{1.0, 8.0, 0.3, 0.0};
  auto few = noiseless_pairs(truth, 19);
  EXPECT_THROW(ssal::fit_sigmoid(few), ssal::ContractViolation);

  // Cosine span below 0.5 cannot pin the curve.
  std::vector<std::pair<double, double>> narrow;
  for (int i = 0; i < 30; ++i) {
    double s = 0.2 + 0.3 * i / 29.0;
    narrow.emplace_back(s, ssal::sigmoid_eval(truth, s));
  }
  EXPECT_THROW(ssal::fit_sigmoid(narrow), ssal::FitError);

  // Constant confidences carry no slope information.
  std::vector<std::pair<double, double>> flat;
  for (int i = 0; i < 30; ++i) flat.emplace_back(-1.0 + 2.0 * i / 29.0, 0.5);
  EXPECT_THROW(ssal::fit_sigmoid(flat), ssal::FitError);
}

TEST(ThresholdCriterionNames, Formatting) {
  EXPECT_EQ(ssal::ThresholdCriterion::best_accuracy().name(), "best_accuracy");
  EXPECT_EQ(ssal::ThresholdCriterion::far_target(0.01).name(), "far_0.01");
  EXPECT_EQ(ssal::ThresholdCriterion::far_target(0.001).name(), "far_0.001");
}

TEST(CalibrateThreshold, BestAccuracySeparatesCleanLists) {
  ssal::ThresholdReport rep = ssal::calibrate_threshold(
      {0.8, 0.9}, {0.1, 0.2}, ssal::ThresholdCriterion::best_accuracy());
  EXPECT_NEAR(rep.tau, 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(rep.tar, 1.0);
  EXPECT_DOUBLE_EQ(rep.far, 0.0);
}

TEST(CalibrateThreshold, BestAccuracyPrefersCorrectSide) {
  // Candidates 0.4 and 0.6: accuracy 1/3 vs 2/3, so tau = 0.6.
  ssal::ThresholdReport rep = ssal::calibrate_threshold(
      {0.3, 0.7}, {0.5}, ssal::ThresholdCriterion::best_accuracy());
  EXPECT_NEAR(rep.tau, 0.6, 1e-12);
  EXPECT_DOUBLE_EQ(rep.tar, 0.5);
  EXPECT_DOUBLE_EQ(rep.far, 0.0);
}

TEST(CalibrateThreshold, FarTargetPicksSmallestFeasibleTau) {
  std::vector<double> impostor;
  for (int i = 1; i <= 10; ++i) impostor.push_back(0.1 * i);
  ssal::ThresholdReport rep = ssal::calibrate_threshold(
      {1.5}, impostor, ssal::ThresholdCriterion::far_target(0.25));
  EXPECT_NEAR(rep.tau, 0.85, 1e-12);
  EXPECT_NEAR(rep.far, 0.2, 1e-12);
  EXPECT_LE(rep.far, 0.25);
}

TEST(CalibrateThreshold, FarZeroAlwaysSatisfiable) {
  ssal::ThresholdReport rep = ssal::calibrate_threshold(
      {0.6, 0.7}, {0.5, 0.9}, ssal::ThresholdCriterion::far_target(1e-12));
  EXPECT_DOUBLE_EQ(rep.far, 0.0);
}

TEST(CalibrateThreshold, EmptyListsRejected) {
  EXPECT_THROW(ssal::calibrate_threshold({}, {0.5}, ssal::ThresholdCriterion::best_accuracy()),
               ssal::ContractViolation);
  EXPECT_THROW(ssal::calibrate_threshold({0.5}, {}, ssal::ThresholdCriterion::best_accuracy()),
               ssal::ContractViolation);
}

}  // namespace
