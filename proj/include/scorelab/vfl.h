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

#ifndef SCORELAB_VFL_H_
#define SCORELAB_VFL_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scorelab/defense.h"
#include "scorelab/score_core.h"
#include "scorelab/tensor_lite.h"

namespace scorelab {

// Which party holds which feature columns. Slices are disjoint, sorted, and
// cover every column; `active_index` names the label-holding party, which is
// also the adversary.
struct FeatureSplit {
  std::vector<std::vector<std::size_t>> party_slices;
  std::size_t active_index = 0;

  std::size_t num_parties() const { return party_slices.size(); }
  const std::vector<std::size_t>& active() const { return party_slices[active_index]; }
  // Union of the passive slices in ascending column order. This is the
  // attack target layout; it does not depend on how the passive columns are
  // divided among parties.
  std::vector<std::size_t> PassiveIndices() const;
  std::size_t total_dims() const;

  void Validate(std::size_t total_dims) const;
};

// The active party receives floor(strength * d) columns drawn by a seeded
// shuffle; the rest go to n_parties - 1 passive parties in near-even
// contiguous runs of the shuffled order. Party 0 is active. The active slice
// depends only on (d, strength, seed), so the passive union is the same for
// every party count.
FeatureSplit SplitFeatures(std::size_t d, std::size_t n_parties,
                           double strength, std::uint64_t seed);

struct Dataset {
  Matrix features;  // n x d, scaled to [0, 1]
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dims() const { return features.cols(); }
  void Validate() const;
  Dataset Subset(std::span<const std::size_t> rows) const;
};

struct DataSplits {
  Dataset train;
  Dataset test;
};

DataSplits TrainTestSplit(const Dataset& data, double test_fraction,
                          std::uint64_t seed);

// Column-wise min-max scaling to [0, 1]; constant columns map to 0.
void MinMaxScale(Matrix& features);

// Malformed CSV input. The message carries row/column diagnostics.
class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Header row required; the column named `label` holds integer classes
// 0..K-1, every other column is a numeric feature. Features are min-max
// scaled when `scale` is set.
Dataset ReadCsvDataset(std::istream& in, bool scale = true);
Dataset LoadCsvDataset(const std::string& path, bool scale = true);

enum class HeadKind {
  kSumLogits,   // LR: every party emits K logits, the coordinator sums them
  kConcatHead,  // NN: parties emit embeddings, a coordinator layer maps them to K
};

struct VflModelSpec {
  HeadKind head = HeadKind::kSumLogits;
  std::size_t hidden_units = 32;
  std::size_t embedding_dim = 8;
};

class JointVflModel {
 public:
  struct Gradient {
    std::vector<GradientBundle> parties;
    std::optional<DenseLayer> head;
  };

  JointVflModel(FeatureSplit split, HeadKind head, std::vector<Model> parties,
                std::optional<DenseLayer> head_layer, std::size_t num_classes);

  // In SumLogits mode the sub-models are the column blocks of one d -> K
  // linear layer, and only the active party carries a bias. In ConcatHead
  // mode every party gets an Mlp1 emitting `embedding_dim` values.
  static JointVflModel Initialize(const FeatureSplit& split,
                                  const VflModelSpec& spec,
                                  std::size_t num_classes, Rng& rng);

  const FeatureSplit& split() const { return split_; }
  HeadKind head() const { return head_; }
  const std::vector<Model>& parties() const { return parties_; }
  const std::optional<DenseLayer>& head_layer() const { return head_layer_; }
  std::size_t num_classes() const { return num_classes_; }
  std::size_t input_dim() const { return split_.total_dims(); }

  std::vector<std::vector<double>> Partition(std::span<const double> x) const;

  std::vector<double> Logits(const std::vector<std::vector<double>>& parts) const;
  std::vector<double> Logits(std::span<const double> x) const;

  // Backpropagates dL/dlogits through the head and every party.
  Gradient Backward(const std::vector<std::vector<double>>& parts,
                    std::span<const double> grad_logits) const;

  // dL/dx in the full feature layout.
  std::vector<double> InputGradient(std::span<const double> x,
                                    std::span<const double> grad_logits) const;

  void ApplyGradient(const Gradient& grad, double step);

  bool AllFinite() const;
  bool operator==(const JointVflModel& other) const;

 private:
  FeatureSplit split_;
  HeadKind head_;
  std::vector<Model> parties_;
  std::optional<DenseLayer> head_layer_;
  std::size_t num_classes_;
};

struct TrainConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  double learning_rate = 0.5;
};

struct TrainResult {
  JointVflModel model;
  std::vector<double> epoch_accuracy;  // train accuracy after each epoch
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mini-batch gradient descent on mean cross-entropy. Initialization draws
// from Rng(seed); the per-epoch sample order is std::shuffle with
// Rng(seed + 1). Throws TrainingDiverged on a non-finite loss.
TrainResult TrainVfl(const Dataset& train, const FeatureSplit& split,
                     const VflModelSpec& spec, const TrainConfig& config,
                     std::uint64_t seed);

// Coordinator output before any defense.
ConfidenceVector PredictScores(const JointVflModel& model,
                               std::span<const double> x);

// Per-party forward passes, aggregation, softmax, then the defense. The
// returned vector is the only value the coordinator broadcasts.
TransformedScores Infer(const JointVflModel& model,
                        const std::vector<std::vector<double>>& parts,
                        const DefenseKind& defense, Rng& rng);

std::size_t Argmax(std::span<const double> scores);

// Fraction of rows whose defended-score argmax equals the label.
double EvaluateAccuracy(const JointVflModel& model, const Dataset& data,
                        const DefenseKind& defense, Rng& rng);

}  // namespace scorelab

#endif  // SCORELAB_VFL_H_
