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

#include "scorelab/experiment.h"

#include <chrono>
#include <ctime>
#include <future>
#include <map>
#include <stdexcept>

#include "scorelab/report.h"

namespace scorelab {
namespace {

// Offsets that give each stage of an experiment its own random stream.
constexpr std::uint64_t kSplitStream = 11;
constexpr std::uint64_t kFeatureStream = 23;
constexpr std::uint64_t kTrainStream = 37;
constexpr std::uint64_t kDefenseStream = 53;
constexpr std::uint64_t kAttackStream = 71;
constexpr std::uint64_t kTimingStream = 89;

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string UtcTimestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Matrix Columns(const Dataset& data, const std::vector<std::size_t>& cols,
               std::size_t rows) {
  Matrix out(rows, cols.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = data.features(r, cols[c]);
  }
  return out;
}

// Broadcast vectors for the first `rows` samples, under `defense`.
Matrix Broadcasts(const JointVflModel& model, const Dataset& data,
                  std::size_t rows, const DefenseKind& defense, Rng& rng) {
  Matrix out(rows, model.num_classes());
  for (std::size_t r = 0; r < rows; ++r) {
    const TransformedScores p =
        Infer(model, model.Partition(data.features.row(r)), defense, rng);
    std::copy(p.values.begin(), p.values.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

std::string AttackName(AttackKind kind) {
  return kind == AttackKind::kGia ? "gia" : "grn";
}

AttackKind ParseAttackKind(const std::string& name) {
  if (name == "gia") return AttackKind::kGia;
  if (name == "grn") return AttackKind::kGrn;
  throw std::invalid_argument("unknown attack kind: " + name);
}

void ExperimentConfig::Validate() const {
  if (csv_path.empty()) synthetic.Validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  }
  if (n_parties < 2) throw std::invalid_argument("need at least 2 parties");
  if (!(attack_strength > 0.0 && attack_strength < 1.0)) {
    throw std::invalid_argument("attack strength must lie in (0, 1)");
  }
  if (train.batch_size == 0 || !(train.learning_rate > 0.0)) {
    throw std::invalid_argument("training batch size and learning rate must be positive");
  }
  if (model.head == HeadKind::kConcatHead &&
      (model.hidden_units == 0 || model.embedding_dim == 0)) {
    throw std::invalid_argument("NN mode needs hidden units and embedding width");
  }
  if (attack_samples == 0) throw std::invalid_argument("attack samples must be >= 1");
  ValidateDefense(defense);
  gia.Validate();
  grn.Validate();
}

double DefenseEpsilon(const DefenseKind& kind) {
  if (const auto* d = std::get_if<defense::PriveeDp>(&kind)) return d->budget.epsilon;
  if (const auto* d = std::get_if<defense::PriveeDpPlusPlus>(&kind)) return d->epsilon_min;
  if (const auto* d = std::get_if<defense::GaussianDp>(&kind)) return d->budget.epsilon;
  return 0.0;
}

DefenseKind WithEpsilon(const DefenseKind& kind, double epsilon) {
  DefenseKind out = kind;
  if (auto* d = std::get_if<defense::PriveeDp>(&out)) d->budget.epsilon = epsilon;
  if (auto* d = std::get_if<defense::GaussianDp>(&out)) d->budget.epsilon = epsilon;
  if (auto* d = std::get_if<defense::PriveeDpPlusPlus>(&out)) {
    const double ratio = d->epsilon_max / d->epsilon_min;
    d->epsilon_min = epsilon;
    d->epsilon_max = epsilon * ratio;
  }
  return out;
}

PreparedTask PrepareTask(const ExperimentConfig& config) {
  config.Validate();
  const Dataset all = config.csv_path.empty() ? MakeSynthetic(config.synthetic)
                                              : LoadCsvDataset(config.csv_path);
  DataSplits data = TrainTestSplit(all, config.test_fraction, config.seed + kSplitStream);
  FeatureSplit split = SplitFeatures(all.dims(), config.n_parties,
                                     config.attack_strength, config.seed + kFeatureStream);
  const auto start = std::chrono::steady_clock::now();
  TrainResult trained = TrainVfl(data.train, split, config.model, config.train,
                                 config.seed + kTrainStream);
  const double seconds = Seconds(start);
  return PreparedTask{std::move(data), std::move(split), std::move(trained), seconds};
}

ExperimentRecord RunExperiment(const ExperimentConfig& config) {
  return RunExperiment(config, PrepareTask(config));
}

ExperimentRecord RunExperiment(const ExperimentConfig& config,
                               const PreparedTask& task) {
  config.Validate();
  const JointVflModel& model = task.trained.model;
  const Dataset& train = task.data.train;
  const Dataset& test = task.data.test;
  const std::vector<std::size_t> active = task.split.active();
  const std::vector<std::size_t> passive = task.split.PassiveIndices();

  ExperimentRecord rec;
  rec.defense = DefenseName(config.defense);
  rec.attack = AttackName(config.attack);
  rec.n_parties = config.n_parties;
  rec.attack_strength = config.attack_strength;
  rec.epsilon = DefenseEpsilon(config.defense);
  rec.seed = config.seed;
  rec.train_seconds = task.train_seconds;

  {
    Rng none_rng(config.seed + kDefenseStream);
    Rng def_rng(config.seed + kDefenseStream);
    rec.accuracy_no_defense = EvaluateAccuracy(model, test, defense::None{}, none_rng);
    rec.accuracy_with_defense = EvaluateAccuracy(model, test, config.defense, def_rng);
    rec.delta_accuracy = rec.accuracy_with_defense - rec.accuracy_no_defense;
    rec.accuracy_budget_exceeded = std::abs(rec.delta_accuracy) > kAccuracyBudget;
  }

  {
    // Defense latency on the test-set scores, outside any training loop.
    Rng rng(config.seed + kTimingStream);
    double total = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const ConfidenceVector c = PredictScores(model, test.features.row(i));
      const auto t0 = std::chrono::steady_clock::now();
      const TransformedScores p = Defend(c, config.defense, rng);
      total += Seconds(t0);
      if (p.values.empty()) throw std::logic_error("defense returned no scores");
    }
    rec.defense_seconds_per_call = total / static_cast<double>(test.size());
  }

  const auto attack_start = std::chrono::steady_clock::now();
  if (config.attack == AttackKind::kGia) {
    const std::size_t rows = std::min(config.attack_samples, test.size());
    const Matrix x_act = Columns(test, active, rows);
    const Matrix truth = Columns(test, passive, rows);
    Rng none_rng(config.seed + kDefenseStream);
    Rng def_rng(config.seed + kDefenseStream);
    const Matrix obs_none = Broadcasts(model, test, rows, defense::None{}, none_rng);
    const Matrix obs_def = Broadcasts(model, test, rows, config.defense, def_rng);
    const std::uint64_t attack_seed = config.seed + kAttackStream;
    rec.mse_no_defense = RunGia(model, x_act, obs_none, truth, config.gia, attack_seed).mse;
    rec.mse_with_defense = RunGia(model, x_act, obs_def, truth, config.gia, attack_seed).mse;
    rec.random_guess_mse = RandomGuessBaseline(truth);
  } else {
    const Matrix train_act = Columns(train, active, train.size());
    const Matrix eval_act = Columns(test, active, test.size());
    const Matrix truth = Columns(test, passive, test.size());
    Rng none_rng(config.seed + kDefenseStream);
    Rng def_rng(config.seed + kDefenseStream);
    const Matrix train_none = Broadcasts(model, train, train.size(), defense::None{}, none_rng);
    const Matrix eval_none = Broadcasts(model, test, test.size(), defense::None{}, none_rng);
    const Matrix train_def = Broadcasts(model, train, train.size(), config.defense, def_rng);
    const Matrix eval_def = Broadcasts(model, test, test.size(), config.defense, def_rng);
    GrnConfig grn = config.grn;
    grn.seed = config.seed + kAttackStream;
    rec.mse_no_defense =
        GrnAttack(model, train_act, train_none, eval_act, eval_none, truth, grn).report.mse;
    rec.mse_with_defense =
        GrnAttack(model, train_act, train_def, eval_act, eval_def, truth, grn).report.mse;
    rec.random_guess_mse = RandomGuessBaseline(truth);
  }
  rec.attack_seconds = Seconds(attack_start);
  rec.timestamp = UtcTimestamp();
  rec.config_json = ConfigToJson(config).dump();
  return rec;
}

std::vector<ExperimentRecord> Ablate(const ExperimentConfig& base,
                                     const AblationGrid& grid) {
  if (grid.epsilons.empty() || grid.client_counts.empty()) {
    throw std::invalid_argument("ablation grid is empty");
  }
  // Training depends on the client count only; share it across epsilons.
  std::map<std::size_t, std::shared_future<PreparedTask>> tasks;
  for (std::size_t clients : grid.client_counts) {
    if (tasks.count(clients)) continue;
    ExperimentConfig cfg = base;
    cfg.n_parties = clients;
    tasks.emplace(clients, std::async(std::launch::async, [cfg] {
                             return PrepareTask(cfg);
                           }).share());
  }
  std::vector<std::future<ExperimentRecord>> jobs;
  for (double eps : grid.epsilons) {
    for (std::size_t clients : grid.client_counts) {
      ExperimentConfig cfg = base;
      cfg.n_parties = clients;
      cfg.defense = WithEpsilon(base.defense, eps);
      auto task = tasks.at(clients);
      jobs.push_back(std::async(std::launch::async, [cfg, task] {
        return RunExperiment(cfg, task.get());
      }));
    }
  }
  // Single writer: collect in grid order once every job is done.
  std::vector<ExperimentRecord> out;
  out.reserve(jobs.size());
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

}  // namespace scorelab
