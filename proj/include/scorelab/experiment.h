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

#ifndef SCORELAB_EXPERIMENT_H_
#define SCORELAB_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scorelab/attacks.h"
#include "scorelab/defense.h"
#include "scorelab/synthetic.h"
#include "scorelab/vfl.h"

namespace scorelab {

enum class AttackKind { kGia, kGrn };

std::string AttackName(AttackKind kind);
AttackKind ParseAttackKind(const std::string& name);

// Records with |delta accuracy| above this are flagged, not rejected.
inline constexpr double kAccuracyBudget = 0.01;

// Default-constructed, this is the standard desk task: 16 Gaussian-blob
// classes over 12 features, a linear (LR) joint model, two parties.
struct ExperimentConfig {
  std::string csv_path;  // empty: use `synthetic`
  SyntheticSpec synthetic;
  double test_fraction = 0.25;

  VflModelSpec model;
  TrainConfig train;
  std::size_t n_parties = 2;
  double attack_strength = 0.5;

  DefenseKind defense = defense::PriveeDp{};
  AttackKind attack = AttackKind::kGia;
  GiaConfig gia;
  GrnConfig grn;          // seed is derived from `seed`
  std::size_t attack_samples = 40;  // GIA rows taken from the test split

  std::uint64_t seed = 1;
  std::string output_path;

  // Throws std::invalid_argument on any invalid parameter.
  void Validate() const;
};

// One (dataset, model, defense, attack, seed) cell.
struct ExperimentRecord {
  std::string defense;
  std::string attack;
  std::size_t n_parties = 0;
  double attack_strength = 0.0;
  double epsilon = 0.0;  // 0 when the defense has no budget

  double mse_no_defense = 0.0;
  double mse_with_defense = 0.0;
  double random_guess_mse = 0.0;
  double accuracy_no_defense = 0.0;
  double accuracy_with_defense = 0.0;
  double delta_accuracy = 0.0;  // accuracy_with_defense - accuracy_no_defense
  bool accuracy_budget_exceeded = false;

  double defense_seconds_per_call = 0.0;
  double attack_seconds = 0.0;
  double train_seconds = 0.0;

  std::uint64_t seed = 0;
  std::string timestamp;
  std::string config_json;  // echo of the config that produced the record

  bool operator==(const ExperimentRecord&) const = default;
};

// Epsilon of a budgeted defense; 0 otherwise. PRIVEE-DP++ reports its
// smallest per-class epsilon.
double DefenseEpsilon(const DefenseKind& kind);
// Copy of `kind` with its (smallest) epsilon replaced.
DefenseKind WithEpsilon(const DefenseKind& kind, double epsilon);

// Everything an experiment needs before attacking: data, split and the
// trained joint model.
struct PreparedTask {
  DataSplits data;
  FeatureSplit split;
  TrainResult trained;
  double train_seconds = 0.0;
};

PreparedTask PrepareTask(const ExperimentConfig& config);

// Trains once, then runs the configured attack against undefended and
// defended broadcasts with identical samples and attack seeds.
ExperimentRecord RunExperiment(const ExperimentConfig& config);
ExperimentRecord RunExperiment(const ExperimentConfig& config,
                               const PreparedTask& task);

struct AblationGrid {
  std::vector<double> epsilons;
  std::vector<std::size_t> client_counts;
};

// One record per (epsilon, client count) cell, epsilon-major, all cells
// sharing config.seed. Cells run as independent parallel jobs.
std::vector<ExperimentRecord> Ablate(const ExperimentConfig& base,
                                     const AblationGrid& grid);

}  // namespace scorelab

#endif  // SCORELAB_EXPERIMENT_H_
