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

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "scorelab/bench.h"
#include "scorelab/experiment.h"
#include "scorelab/metrics.h"
#include "scorelab/report.h"
#include "scorelab/synthetic.h"
#include "support/oracles.h"

namespace scorelab {
namespace {

TEST(MetricsTest, Examples) {
  Matrix a(3, 4, 0.25);
  EXPECT_EQ(ReconstructionMse(a, a), 0.0);
  Matrix truth(1, 2, 1.0), est(1, 2, 0.0);
  EXPECT_EQ(ReconstructionMse(truth, est), 1.0);
  EXPECT_THROW(ReconstructionMse(Matrix(2, 2), Matrix(2, 3)), std::invalid_argument);
  EXPECT_THROW(ReconstructionMse(Matrix(0, 2), Matrix(0, 2)), std::invalid_argument);
}

TEST(MetricsTest, MatchesColumnMajorDoubleLoop) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Matrix x(7 + t, 5), y(7 + t, 5);
    for (double& v : x.data()) v = n(rng);
    for (double& v : y.data()) v = n(rng);
    long double total = 0.0L;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      for (std::size_t r = 0; r < x.rows(); ++r) {
        const long double d = static_cast<long double>(x(r, c)) - y(r, c);
        total += d * d;
      }
    }
    const double expected = static_cast<double>(total / (x.rows() * x.cols()));
    EXPECT_NEAR(ReconstructionMse(x, y), expected, 1e-13 * expected);
    const auto rows = RowSquaredErrors(x, y);
    double mean = 0.0;
    for (double v : rows) mean += v;
    EXPECT_NEAR(mean / rows.size(), expected, 1e-13 * expected);
  }
}

TEST(SyntheticTest, DeterministicScaledAndBalanced) {
  const SyntheticSpec spec{10, 6, 2000, 3.0, 4};
  const Dataset a = MakeSynthetic(spec);
  const Dataset b = MakeSynthetic(spec);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  std::vector<int> hist(10, 0);
  for (int l : a.labels) ++hist[l];
  for (int h : hist) EXPECT_NEAR(h, 200, 10);
  for (double v : a.features.data()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
  EXPECT_THROW(MakeSynthetic({1, 6, 100, 3.0, 1}), std::invalid_argument);
}

TEST(SyntheticTest, WideMarginIsLinearlySeparable) {
  const Dataset data = MakeSynthetic({5, 8, 500, 8.0, 2});
  const DenseLayer lr = oracle::TrainCentralizedLr(data, 60, 32, 0.5, 3);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto z = oracle::NaiveAffine(lr.weights, lr.biases, data.features.row(i));
    if (Argmax(z) == static_cast<std::size_t>(data.labels[i])) ++correct;
  }
  EXPECT_EQ(correct, data.size());
}

TEST(SyntheticTest, RandomSimplexVectorIsValid) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const ConfidenceVector c = RandomSimplexVector(2 + t, rng);
    EXPECT_EQ(c.size(), static_cast<std::size_t>(2 + t));
  }
}

ExperimentConfig SmallConfig() {
  ExperimentConfig cfg;
  cfg.synthetic = {6, 8, 400, 3.0, 3};
  cfg.train.epochs = 15;
  cfg.attack_samples = 10;
  cfg.gia.restarts = 2;
  cfg.grn.epochs = 10;
  cfg.seed = 17;
  return cfg;
}

void ExpectSameModuloClock(ExperimentRecord a, ExperimentRecord b) {
  for (ExperimentRecord* r : {&a, &b}) {
    r->defense_seconds_per_call = r->attack_seconds = r->train_seconds = 0.0;
    r->timestamp.clear();
  }
  EXPECT_TRUE(a == b);
}

TEST(ExperimentTest, PriveeRecordHasZeroDeltaAndIsDeterministic) {
  const ExperimentConfig cfg = SmallConfig();
  const ExperimentRecord a = RunExperiment(cfg);
  const ExperimentRecord b = RunExperiment(cfg);
  EXPECT_EQ(a.delta_accuracy, 0.0);
  EXPECT_EQ(a.delta_accuracy, a.accuracy_with_defense - a.accuracy_no_defense);
  EXPECT_FALSE(a.accuracy_budget_exceeded);
  EXPECT_EQ(a.defense, "privee-dp");
  EXPECT_EQ(a.epsilon, 0.1);
  EXPECT_GT(a.mse_with_defense, a.mse_no_defense);
  EXPECT_GT(a.defense_seconds_per_call, 0.0);
  ExpectSameModuloClock(a, b);
}

TEST(ExperimentTest, NoneDefenseGivesIdenticalArms) {
  for (auto attack : {AttackKind::kGia, AttackKind::kGrn}) {
    ExperimentConfig cfg = SmallConfig();
    cfg.defense = defense::None{};
    cfg.attack = attack;
    const ExperimentRecord r = RunExperiment(cfg);
    EXPECT_EQ(r.mse_with_defense, r.mse_no_defense) << AttackName(attack);
    EXPECT_EQ(r.delta_accuracy, 0.0);
  }
}

TEST(ExperimentTest, GaussianBaselineIsFlaggedNotRejected) {
  ExperimentConfig cfg = SmallConfig();
  cfg.synthetic.margin = 1.0;
  cfg.defense = defense::GaussianDp{{0.1, 1e-5, 1.0}};
  const ExperimentRecord r = RunExperiment(cfg);
  EXPECT_LT(r.delta_accuracy, -0.01);
  EXPECT_TRUE(r.accuracy_budget_exceeded);
}

TEST(ExperimentTest, RejectsInvalidConfig) {
  ExperimentConfig cfg = SmallConfig();
  cfg.attack_strength = 1.5;
  EXPECT_THROW(RunExperiment(cfg), std::invalid_argument);
  cfg = SmallConfig();
  cfg.defense = defense::Round{0};
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  EXPECT_THROW(ParseAttackKind("eq-solve"), std::invalid_argument);
}

TEST(ExperimentTest, WithEpsilonKeepsPerClassRatio) {
  const DefenseKind d = WithEpsilon(defense::PriveeDpPlusPlus{0.05, 0.5}, 0.2);
  const auto& pp = std::get<defense::PriveeDpPlusPlus>(d);
  EXPECT_DOUBLE_EQ(pp.epsilon_min, 0.2);
  EXPECT_DOUBLE_EQ(pp.epsilon_max, 2.0);
  EXPECT_EQ(DefenseEpsilon(WithEpsilon(defense::PriveeDp{}, 0.7)), 0.7);
  EXPECT_EQ(DefenseEpsilon(defense::Round{}), 0.0);
}

TEST(AblateTest, GridShapeAndZeroDelta) {
  ExperimentConfig cfg = SmallConfig();
  const auto single = Ablate(cfg, {{0.1}, {2}});
  EXPECT_EQ(single.size(), 1u);
  const auto records = Ablate(cfg, {{0.05, 0.1, 0.5}, {2, 3}});
  ASSERT_EQ(records.size(), 6u);
  EXPECT_EQ(records[0].epsilon, 0.05);
  EXPECT_EQ(records[1].n_parties, 3u);
  EXPECT_EQ(records[5].epsilon, 0.5);
  for (const auto& r : records) {
    EXPECT_EQ(r.delta_accuracy, 0.0);
    EXPECT_EQ(r.seed, cfg.seed);
  }
  ExpectSameModuloClock(single[0], records[2]);
  EXPECT_THROW(Ablate(cfg, {{}, {2}}), std::invalid_argument);
}

TEST(ReportTest, RecordJsonRoundTrip) {
  ExperimentRecord r;
  r.defense = "privee-dp";
  r.attack = "grn";
  r.n_parties = 5;
  r.attack_strength = 0.25;
  r.epsilon = 0.07;
  r.mse_no_defense = 0.0123456789012345;
  r.mse_with_defense = 1.0 / 3.0;
  r.random_guess_mse = 0.08;
  r.accuracy_no_defense = 0.91;
  r.accuracy_with_defense = 0.87;
  r.delta_accuracy = r.accuracy_with_defense - r.accuracy_no_defense;
  r.accuracy_budget_exceeded = true;
  r.defense_seconds_per_call = 1.5e-6;
  r.seed = 42;
  r.timestamp = "2026-01-01T00:00:00Z";
  r.config_json = "{\"seed\":42}";
  const std::string text = RecordToJson(r).dump();
  EXPECT_TRUE(RecordFromJson(nlohmann::json::parse(text)) == r);

  nlohmann::json broken = RecordToJson(r);
  broken["delta_accuracy"] = 0.0;
  EXPECT_THROW(RecordFromJson(broken), std::invalid_argument);
}

TEST(ReportTest, ConfigJsonRoundTripAndUnknownKeys) {
  ExperimentConfig cfg = SmallConfig();
  cfg.defense = defense::PriveeDpPlusPlus{0.1, 0.9, 1e-6, 2.0, TransformKind::kReflection};
  cfg.attack = AttackKind::kGrn;
  cfg.model.head = HeadKind::kConcatHead;
  cfg.n_parties = 4;
  const ExperimentConfig back = ConfigFromJson(ConfigToJson(cfg));
  EXPECT_EQ(ConfigToJson(back), ConfigToJson(cfg));

  nlohmann::json j = ConfigToJson(cfg);
  j["federation"]["partys"] = 3;
  EXPECT_THROW(ConfigFromJson(j), std::invalid_argument);
}

TEST(ReportTest, DefenseJsonRoundTrip) {
  for (const DefenseKind& d :
       {DefenseKind(defense::None{}), DefenseKind(defense::PriveeDp{{0.3, 1e-4, 2.0}}),
        DefenseKind(defense::PriveeDpPlusPlus{}), DefenseKind(defense::Round{4}),
        DefenseKind(defense::GaussianDp{}), DefenseKind(defense::MonotoneEncode{99})}) {
    EXPECT_EQ(DefenseToJson(DefenseFromJson(DefenseToJson(d))), DefenseToJson(d));
  }
  EXPECT_THROW(DefenseFromJson(nlohmann::json{{"kind", "purifier"}}), std::invalid_argument);
}

TEST(ReportTest, CsvHasHeaderAndOneRowPerRecord) {
  std::vector<ExperimentRecord> recs(3);
  std::ostringstream out;
  WriteRecordsCsv(out, recs);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("defense,attack,epsilon,n_parties", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(ReportTest, SvgChart) {
  const std::vector<ChartSeries> s{{"privee-dp", {10, 100, 1000}, {1e-6, 1e-5, 1e-4}}};
  const std::string svg = RenderSvgChart("latency", "K", "seconds", s, true, true);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("privee-dp"), std::string::npos);
  const std::vector<ChartSeries> bad{{"x", {0, 1}, {1, 2}}};
  EXPECT_THROW(RenderSvgChart("t", "x", "y", bad, true, false), std::invalid_argument);
}

TEST(BenchTest, SlopeOfSyntheticPowerLaw) {
  std::vector<BenchPoint> pts;
  for (std::size_t k : {10u, 100u, 1000u}) {
    pts.push_back({"x", k, 1000, 3e-9 * std::pow(static_cast<double>(k), 1.1), 0.0});
  }
  EXPECT_NEAR(LogLogSlope(pts), 1.1, 1e-12);
  EXPECT_THROW(LogLogSlope(std::span<const BenchPoint>(pts.data(), 1)), std::invalid_argument);
}

TEST(BenchTest, MeasuresEveryPointAndWritesCsv) {
  const std::vector<DefenseKind> kinds{defense::PriveeDp{}, defense::Round{2},
                                       defense::MonotoneEncode{1}};
  const std::vector<std::size_t> ks{10, 100};
  const auto pts = BenchDefenseScaling(kinds, ks, {});
  ASSERT_EQ(pts.size(), 6u);
  for (const auto& p : pts) {
    EXPECT_GT(p.mean_seconds, 0.0);
    EXPECT_GE(p.p95_seconds, 0.0);
    EXPECT_EQ(p.calls, 1000u);
  }
  std::ostringstream out;
  WriteBenchCsv(out, pts);
  EXPECT_EQ(out.str().rfind("defense,k,calls,mean_seconds,p95_seconds\n", 0), 0u);

  const std::vector<std::size_t> descending{100, 10};
  EXPECT_THROW(BenchDefenseScaling(kinds, descending, {}), std::invalid_argument);
  EXPECT_THROW(BenchDefenseScaling(kinds, ks, {999, 10, 1}), std::invalid_argument);
}

TEST(BenchTest, RoundAndEncodeScaleLikePrivee) {
  const std::vector<std::size_t> ks{100, 1000, 10000};
  const auto privee = BenchDefenseScaling(std::vector<DefenseKind>{defense::PriveeDp{}}, ks, {});
  const auto round = BenchDefenseScaling(std::vector<DefenseKind>{defense::Round{2}}, ks, {});
  const auto encode =
      BenchDefenseScaling(std::vector<DefenseKind>{defense::MonotoneEncode{3}}, ks, {});
  for (std::size_t i = 0; i < ks.size(); ++i) {
    EXPECT_LT(round[i].mean_seconds, 10.0 * privee[i].mean_seconds);
    EXPECT_GT(round[i].mean_seconds, 0.1 * privee[i].mean_seconds);
  }
  // K log K over this range fits a slope of about 1.1; leave timing headroom.
  EXPECT_LT(LogLogSlope(encode), 1.4);
}

}  // namespace
}  // namespace scorelab
