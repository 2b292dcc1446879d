//
// Copyright 2026 The Scorelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "scorelab/defense.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "scorelab/score_core.h"
#include "support/oracles.h"

namespace scorelab {
namespace {

// sqrt(2 ln(1.25 / 1e-5)) evaluated with mpmath at 40 digits.
constexpr double kSigmaAtEpsilonOne = 4.844805262605389421258642157585593931519;

PrivacyBudget Budget(double epsilon) { return {epsilon, 1e-5, 1.0}; }

TEST(GaussianSigmaTest, MatchesHighPrecisionValues) {
  EXPECT_NEAR(GaussianSigma(Budget(0.1)), 48.44805262605389421, 1e-12);
  EXPECT_NEAR(GaussianSigma(Budget(1.0)), kSigmaAtEpsilonOne, 1e-13);
  EXPECT_NEAR(GaussianSigma(Budget(0.05)), 96.89610525210778843, 1e-11);
  EXPECT_NEAR(GaussianSigma(Budget(0.1)) / 48.4479, 1.0, 1e-4);
}

TEST(GaussianSigmaTest, MatchesLongDoubleFormula) {
  for (double eps : {0.01, 0.3, 2.0}) {
    for (double delta : {1e-8, 1e-3, 0.5}) {
      for (double df : {0.5, 1.0, 3.0}) {
        const long double ref =
            std::sqrt(2.0L * std::log(1.25L / delta) * df * df) / eps;
        EXPECT_NEAR(GaussianSigma({eps, delta, df}), static_cast<double>(ref),
                    1e-13 * static_cast<double>(ref));
      }
    }
  }
}

TEST(GaussianSigmaTest, DecreasesWithEpsilon) {
  double prev = INFINITY;
  for (double eps : {0.01, 0.1, 1.0, 10.0, 1e3, 1e6}) {
    const double s = GaussianSigma(Budget(eps));
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(GaussianSigmaTest, RejectsInvalidBudgets) {
  EXPECT_THROW(GaussianSigma({0.0, 1e-5, 1.0}), std::invalid_argument);
  EXPECT_THROW(GaussianSigma({0.1, 0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(GaussianSigma({0.1, 1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(GaussianSigma({0.1, 1.3, 1.0}), std::invalid_argument);
  EXPECT_THROW(GaussianSigma({0.1, 1e-5, 0.0}), std::invalid_argument);
}

TEST(SampleNoiseTest, IntervalIndicesFollowRank) {
  Rng rng(1);
  const NoiseDraw d = SampleNoise(ConfidenceVector({0.2, 0.5, 0.3}), rng);
  EXPECT_EQ(d.interval_indices, (std::vector<int>{1, 3, 2}));
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_GE(d.u[j], (d.interval_indices[j] - 1) / 3.0);
    EXPECT_LT(d.u[j], d.interval_indices[j] / 3.0);
  }
}

TEST(SampleNoiseTest, TopClassDrawsFromUpperHalf) {
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const NoiseDraw d = SampleNoise(ConfidenceVector({0.9, 0.1}), rng);
    ASSERT_GE(d.u[0], 0.5);
    ASSERT_LT(d.u[0], 1.0);
    ASSERT_GE(d.u[1], 0.0);
    ASSERT_LT(d.u[1], 0.5);
  }
}

TEST(SampleNoiseTest, MidpointMode) {
  Rng rng(3);
  const NoiseDraw d =
      SampleNoise(ConfidenceVector({0.2, 0.5, 0.3}), rng, SamplingMode::kMidpoint);
  EXPECT_NEAR(d.u[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(d.u[1], 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(d.u[2], 0.5, 1e-15);
}

TEST(SampleNoiseTest, MonotoneInConfidence) {
  Rng rng(4);
  std::mt19937_64 src(4);
  for (int t = 0; t < 500; ++t) {
    const auto c = oracle::Simplex(2 + t % 30, src);
    const NoiseDraw d = SampleNoise(ConfidenceVector(c), rng);
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[i] < c[j]) {
          ASSERT_LT(d.u[i], d.u[j]);
        }
      }
    }
  }
}

TEST(SampleNoiseTest, SameSeedSameDraw) {
  const ConfidenceVector c({0.1, 0.2, 0.3, 0.4});
  Rng a(77), b(77);
  const NoiseDraw da = SampleNoise(c, a);
  const NoiseDraw db = SampleNoise(c, b);
  EXPECT_EQ(da.u, db.u);
}

PerturbationPlan UnitPlan(TransformKind kind, std::size_t k) {
  return {kind, std::vector<double>(k, 1.0), BudgetMode::kUniform};
}

TEST(PriveePerturbTest, ZeroSigmaIsIdentity) {
  Rng rng(5);
  const ConfidenceVector c({0.2, 0.5, 0.3});
  const PerturbationPlan plan{TransformKind::kIdentity, {0.0, 0.0, 0.0}, BudgetMode::kUniform};
  const auto p = PriveePerturb(c, plan, rng);
  EXPECT_EQ(p.values, (std::vector<double>{0.2, 0.5, 0.3}));
}

TEST(PriveePerturbTest, MidpointIdentityTrace) {
  Rng rng(6);
  const auto p = PriveePerturb(ConfidenceVector({0.2, 0.5, 0.3}),
                               UnitPlan(TransformKind::kIdentity, 3), rng,
                               SamplingMode::kMidpoint);
  EXPECT_NEAR(p.values[0], 0.2 * (1.0 + 1.0 / 6.0), 1e-15);
  EXPECT_NEAR(p.values[1], 0.5 * (1.0 + 5.0 / 6.0), 1e-15);
  EXPECT_NEAR(p.values[2], 0.45, 1e-15);
}

TEST(PriveePerturbTest, MidpointReflectionTrace) {
  Rng rng(7);
  const auto p = PriveePerturb(ConfidenceVector({0.7, 0.3}),
                               UnitPlan(TransformKind::kReflection, 2), rng,
                               SamplingMode::kMidpoint);
  EXPECT_NEAR(p.values[0], 0.225, 1e-15);
  EXPECT_NEAR(p.values[1], -0.625, 1e-15);
}

TEST(PriveePerturbTest, ExplicitDrawMatchesFormula) {
  const ConfidenceVector c({0.1, 0.6, 0.3});
  const NoiseDraw draw{{0.1, 0.9, 0.5}, {1, 3, 2}};
  const PerturbationPlan plan{TransformKind::kReflection, {3.0, 1.0, 2.0}, BudgetMode::kPerClass};
  const auto p = PriveePerturb(c, plan, draw);
  // Sorted scales {1, 2, 3} go to classes in ascending confidence: 0, 2, 1.
  const double shift = 2.0 / 3.0;
  EXPECT_NEAR(p.values[0], 0.1 - shift + 0.1 * 1.0 * 0.1, 1e-15);
  EXPECT_NEAR(p.values[1], 0.6 - shift + 0.9 * 3.0 * 0.6, 1e-15);
  EXPECT_NEAR(p.values[2], 0.3 - shift + 0.5 * 2.0 * 0.3, 1e-15);
  EXPECT_EQ(AssignSigmasByRank(plan, c), (std::vector<double>{1.0, 3.0, 2.0}));
}

TEST(PriveePerturbTest, ZeroEntriesStayAtBase) {
  Rng rng(8);
  const PerturbationPlan plan = UniformPlan(TransformKind::kIdentity, 4, Budget(0.1));
  const auto p = PriveePerturb(ConfidenceVector({0.0, 0.0, 0.4, 0.6}), plan, rng);
  EXPECT_EQ(p.values[0], 0.0);
  EXPECT_EQ(p.values[1], 0.0);
}

TEST(PerturbationPlanTest, Validation) {
  EXPECT_THROW(PerturbationPlan({TransformKind::kIdentity, {1.0, -1.0}, BudgetMode::kPerClass})
                   .Validate(2),
               std::invalid_argument);
  EXPECT_THROW(PerturbationPlan({TransformKind::kIdentity, {1.0, 2.0}, BudgetMode::kUniform})
                   .Validate(2),
               std::invalid_argument);
  EXPECT_THROW(UnitPlan(TransformKind::kIdentity, 3).Validate(2), std::invalid_argument);
}

TEST(PerturbationPlanTest, LogSpacedEpsilons) {
  const auto eps = LogSpacedEpsilons(3, 0.05, 0.5);
  ASSERT_EQ(eps.size(), 3u);
  EXPECT_NEAR(eps[0], 0.05, 1e-15);
  EXPECT_NEAR(eps[1], std::sqrt(0.05 * 0.5), 1e-15);
  EXPECT_NEAR(eps[2], 0.5, 1e-15);
  const auto plan = PerClassPlan(TransformKind::kIdentity, eps, 1e-5, 1.0);
  EXPECT_NEAR(plan.sigmas[0], 10.0 * kSigmaAtEpsilonOne * 2.0, 1e-11);
}

class OrderPropertyTest
    : public ::testing::TestWithParam<std::tuple<TransformKind, std::size_t, bool>> {};

TEST_P(OrderPropertyTest, PerturbationKeepsArgsort) {
  const auto [kind, k, per_class] = GetParam();
  const DefenseKind d = per_class
                            ? DefenseKind(defense::PriveeDpPlusPlus{0.05, 0.5, 1e-5, 1.0, kind})
                            : DefenseKind(defense::PriveeDp{Budget(0.1), kind});
  std::mt19937_64 src(k * 3 + per_class);
  for (int t = 0; t < 10000; ++t) {
    const ConfidenceVector c(oracle::Simplex(k, src));
    Rng rng(t);
    const auto p = Defend(c, d, rng);
    ASSERT_EQ(ArgsortDescending(p.values), ArgsortDescending(c.values()));
  }
}

INSTANTIATE_TEST_SUITE_P(
    Grid, OrderPropertyTest,
    ::testing::Combine(::testing::Values(TransformKind::kIdentity, TransformKind::kReflection),
                       ::testing::Values(2u, 10u, 100u), ::testing::Bool()));

TEST(DefendTest, DeterministicPerSeed) {
  const ConfidenceVector c({0.05, 0.15, 0.3, 0.5});
  for (const DefenseKind& d :
       {DefenseKind(defense::PriveeDp{}), DefenseKind(defense::PriveeDpPlusPlus{}),
        DefenseKind(defense::GaussianDp{}), DefenseKind(defense::MonotoneEncode{9})}) {
    Rng a(11), b(11);
    EXPECT_EQ(Defend(c, d, a).values, Defend(c, d, b).values) << DefenseName(d);
  }
}

TEST(DefendTest, NoneAndRound) {
  Rng rng(1);
  const ConfidenceVector c({0.26, 0.74});
  EXPECT_EQ(Defend(c, defense::None{}, rng).values, (std::vector<double>{0.26, 0.74}));
  const auto r = Defend(c, defense::Round{1}, rng).values;
  EXPECT_DOUBLE_EQ(r[0], 0.3);
  EXPECT_DOUBLE_EQ(r[1], 0.7);
  EXPECT_DOUBLE_EQ(RoundToDigits(0.123456, 3), 0.123);
}

TEST(DefendTest, GaussianZeroDrawIsIdentity) {
  const ConfidenceVector c({0.2, 0.8});
  EXPECT_EQ(AddNoise(c, std::vector<double>{0.0, 0.0}).values, (std::vector<double>{0.2, 0.8}));
}

TEST(DefendTest, GaussianNoiseScale) {
  Rng rng(12);
  const ConfidenceVector c({0.5, 0.5});
  const defense::GaussianDp d{{1.0, 1e-5, 1.0}};
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int t = 0; t < n; ++t) {
    const double x = Defend(c, d, rng).values[0] - 0.5;
    sum += x;
    sq += x * x;
  }
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  EXPECT_NEAR(sd / kSigmaAtEpsilonOne, 1.0, 0.03);
  EXPECT_NEAR(sum / n, 0.0, 0.1);
}

TEST(DefendTest, OrderPreservingDefensesKeepArgmax) {
  std::mt19937_64 src(13);
  const std::vector<DefenseKind> kinds{
      defense::PriveeDp{}, defense::PriveeDp{Budget(0.1), TransformKind::kReflection},
      defense::PriveeDpPlusPlus{}, defense::MonotoneEncode{42}};
  for (const auto& d : kinds) {
    EXPECT_TRUE(PreservesArgmax(d));
    Rng rng(14);
    for (int t = 0; t < 2000; ++t) {
      const ConfidenceVector c(oracle::Simplex(2 + t % 50, src));
      const auto p = Defend(c, d, rng);
      ASSERT_EQ(ArgsortDescending(p.values)[0], ArgsortDescending(c.values())[0]);
    }
  }
}

TEST(DefendTest, RoundingAndGaussianViolateOrder) {
  EXPECT_FALSE(PreservesArgmax(defense::Round{1}));
  EXPECT_FALSE(PreservesArgmax(defense::GaussianDp{}));
  std::mt19937_64 src(15);
  Rng rng(15);
  int round_breaks = 0, gauss_breaks = 0;
  for (int t = 0; t < 2000; ++t) {
    const ConfidenceVector c(oracle::Simplex(10, src));
    if (!PreservesOrder(c.values(), Defend(c, defense::Round{1}, rng).values)) ++round_breaks;
    if (ArgsortDescending(Defend(c, defense::GaussianDp{Budget(0.1)}, rng).values)[0] !=
        ArgsortDescending(c.values())[0]) {
      ++gauss_breaks;
    }
  }
  EXPECT_GT(round_breaks, 0);
  EXPECT_GT(gauss_breaks, 0);
}

TEST(DefendTest, ValidatesParameters) {
  EXPECT_THROW(ValidateDefense(defense::Round{0}), std::invalid_argument);
  EXPECT_THROW(ValidateDefense(defense::Round{13}), std::invalid_argument);
  EXPECT_THROW(ValidateDefense(defense::PriveeDp{{-1.0, 1e-5, 1.0}}), std::invalid_argument);
  EXPECT_THROW(ValidateDefense(defense::PriveeDpPlusPlus{0.5, 0.05}), std::invalid_argument);
  EXPECT_NO_THROW(ValidateDefense(defense::Round{12}));
}

TEST(DefendTest, Names) {
  EXPECT_EQ(DefenseName(defense::None{}), "none");
  EXPECT_EQ(DefenseName(defense::PriveeDp{}), "privee-dp");
  EXPECT_EQ(DefenseName(defense::PriveeDpPlusPlus{}), "privee-dp++");
  EXPECT_EQ(DefenseName(defense::Round{3}), "round(3)");
  EXPECT_EQ(DefenseName(defense::GaussianDp{}), "gaussian-dp");
  EXPECT_EQ(DefenseName(defense::MonotoneEncode{}), "monotone-encode");
}

TEST(MonotoneMapTest, StrictlyIncreasingAndKeyed) {
  const MonotoneMap m(3, 11);
  double prev = -INFINITY;
  for (int i = 0; i <= 1000; ++i) {
    const double y = m(i / 1000.0);
    ASSERT_GT(y, prev);
    prev = y;
  }
  const MonotoneMap other(4, 11);
  EXPECT_NE(m(0.37), other(0.37));
}

TEST(FeasibilityProbeTest, TwoClassPerturbedOutput) {
  Rng rng(16);
  const auto p = Defend(ConfidenceVector({0.6, 0.4}), defense::PriveeDp{}, rng);
  EXPECT_GE(FeasibilityProbe(p, TransformKind::kIdentity, 1000), 2u);
}

TEST(FeasibilityProbeTest, NoiseFreeGeneratingPairCounts) {
  const TransformedScores p{{0.6, 0.4}};
  EXPECT_GE(FeasibilityProbe(p, TransformKind::kIdentity, 10), 1u);
}

TEST(FeasibilityProbeTest, ThreeClassPerturbedOutput) {
  std::mt19937_64 src(17);
  Rng rng(17);
  for (auto kind : {TransformKind::kIdentity, TransformKind::kReflection}) {
    const ConfidenceVector c({0.2, 0.45, 0.35});
    const auto p = Defend(c, defense::PriveeDp{Budget(0.1), kind}, rng);
    EXPECT_GE(FeasibilityProbe(p, kind, 200), 2u);
  }
}

TEST(FeasibilityProbeTest, AgreesWithBruteForceOracle) {
  // Independent check at K = 2: walk c_1 = j / R * p_1 and verify the noise
  // equations for both classes directly.
  Rng rng(18);
  const ConfidenceVector c({0.7, 0.3});
  const auto p = Defend(c, defense::PriveeDp{Budget(5.0)}, rng).values;
  ASSERT_GT(p[0], p[1]);
  const int grid = 400;
  std::size_t expected = 0;
  for (int j = 1; j <= grid; ++j) {
    const double c1 = static_cast<double>(j) / grid * p[1];
    const double c0 = 1.0 - c1;
    if (c0 <= 0.0 || c0 > p[0]) continue;
    const double n0 = p[0] / c0 - 1.0;
    const double n1 = p[1] / c1 - 1.0;
    if (n0 >= 0.0 && n1 >= 0.0 && n1 <= n0) ++expected;
  }
  EXPECT_GT(expected, 1u);
  EXPECT_EQ(FeasibilityProbe(TransformedScores{p}, TransformKind::kIdentity, grid), expected);
}

TEST(FeasibilityProbeTest, TinyScoresStillResolved) {
  Rng rng(19);
  for (auto kind : {TransformKind::kIdentity, TransformKind::kReflection}) {
    const ConfidenceVector c({1e-5, 0.4, 0.59999});
    const auto p = Defend(c, defense::PriveeDp{Budget(0.1), kind}, rng);
    EXPECT_GE(FeasibilityProbe(p, kind, 200), 2u);
  }
}

TEST(FeasibilityProbeTest, ZeroScoreCarriesFreeNoise) {
  const TransformedScores p{{0.0, 0.45, 0.9}};
  EXPECT_GE(FeasibilityProbe(p, TransformKind::kIdentity, 200), 2u);
  EXPECT_EQ(FeasibilityProbe(TransformedScores{{-0.1, 1.1}}, TransformKind::kIdentity, 50), 0u);
}

TEST(FeasibilityProbeTest, RejectsLargeK) {
  EXPECT_THROW(FeasibilityProbe(TransformedScores{{0.25, 0.25, 0.25, 0.25}},
                                TransformKind::kIdentity, 10),
               std::invalid_argument);
}

}  // namespace
}  // namespace scorelab
