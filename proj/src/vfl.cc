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

#include "scorelab/vfl.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

namespace scorelab {

std::vector<std::size_t> FeatureSplit::PassiveIndices() const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < party_slices.size(); ++p) {
    if (p == active_index) continue;
    out.insert(out.end(), party_slices[p].begin(), party_slices[p].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t FeatureSplit::total_dims() const {
  std::size_t n = 0;
  for (const auto& s : party_slices) n += s.size();
  return n;
}

void FeatureSplit::Validate(std::size_t d) const {
  if (party_slices.size() < 2) throw std::invalid_argument("need at least 2 parties");
  if (active_index >= party_slices.size()) {
    throw std::invalid_argument("active party index out of range");
  }
  std::vector<int> seen(d, 0);
  for (std::size_t p = 0; p < party_slices.size(); ++p) {
    if (party_slices[p].empty()) {
      throw std::invalid_argument("party " + std::to_string(p) + " holds no features");
    }
    for (std::size_t idx : party_slices[p]) {
      if (idx >= d) throw std::invalid_argument("feature index out of range");
      if (seen[idx]++) throw std::invalid_argument("feature slices overlap");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::invalid_argument("feature slices do not cover every column");
  }
}

FeatureSplit SplitFeatures(std::size_t d, std::size_t n_parties,
                           double strength, std::uint64_t seed) {
  if (n_parties < 2) throw std::invalid_argument("need at least 2 parties");
  if (d < n_parties) throw std::invalid_argument("fewer features than parties");
  if (!(strength > 0.0 && strength < 1.0)) {
    throw std::invalid_argument("attack strength must lie in (0, 1)");
  }
  const auto n_active = static_cast<std::size_t>(
      std::floor(strength * static_cast<double>(d) + 1e-9));
  if (n_active == 0) throw std::invalid_argument("active party would hold no features");
  const std::size_t n_passive = d - n_active;
  const std::size_t passive_parties = n_parties - 1;
  if (n_passive < passive_parties) {
    throw std::invalid_argument("attack strength leaves an empty passive slice");
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FeatureSplit split;
  split.active_index = 0;
  split.party_slices.emplace_back(order.begin(), order.begin() + n_active);
  std::size_t offset = n_active;
  for (std::size_t p = 0; p < passive_parties; ++p) {
    const std::size_t take =
        n_passive / passive_parties + (p < n_passive % passive_parties ? 1 : 0);
    split.party_slices.emplace_back(order.begin() + offset,
                                    order.begin() + offset + take);
    offset += take;
  }
  for (auto& s : split.party_slices) std::sort(s.begin(), s.end());
  split.Validate(d);
  return split;
}

void Dataset::Validate() const {
  if (features.rows() != labels.size()) {
    throw std::invalid_argument("feature rows and labels differ in length");
  }
  if (num_classes < 2) throw std::invalid_argument("dataset needs at least 2 classes");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw std::invalid_argument("label out of range");
    }
  }
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  }
}

Dataset Dataset::Subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features = Matrix(rows.size(), dims());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = features.row(rows[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

DataSplits TrainTestSplit(const Dataset& data, double test_fraction,
                          std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(
      std::round(test_fraction * static_cast<double>(data.size())));
  if (n_test == 0 || n_test == data.size()) {
    throw std::invalid_argument("split leaves an empty train or test set");
  }
  std::span<const std::size_t> all(order);
  return {data.Subset(all.subspan(n_test)), data.Subset(all.first(n_test))};
}

void MinMaxScale(Matrix& features) {
  for (std::size_t c = 0; c < features.cols(); ++c) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t r = 0; r < features.rows(); ++r) {
      lo = std::min(lo, features(r, c));
      hi = std::max(hi, features(r, c));
    }
    const double range = hi - lo;
    for (std::size_t r = 0; r < features.rows(); ++r) {
      features(r, c) = range > 0.0 ? (features(r, c) - lo) / range : 0.0;
    }
  }
}

namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim spaces and a trailing carriage return.
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool ParseDouble(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace

Dataset ReadCsvDataset(std::istream& in, bool scale) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("csv: missing header row");
  const std::vector<std::string> header = SplitCsvLine(line);
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw CsvError("csv: no column named 'label'");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  if (header.size() < 2) throw CsvError("csv: no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = SplitCsvLine(line);
    if (cells.size() != header.size()) {
      throw CsvError("csv row " + std::to_string(row) + ": expected " +
                     std::to_string(header.size()) + " cells, got " +
                     std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!ParseDouble(cells[c], v)) {
        throw CsvError("csv row " + std::to_string(row) + ", column '" +
                       header[c] + "': non-numeric value '" + cells[c] + "'");
      }
      if (c == label_col) {
        if (v < 0 || v != std::floor(v)) {
          throw CsvError("csv row " + std::to_string(row) +
                         ", column 'label': labels must be non-negative integers");
        }
        labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
  }
  if (labels.empty()) throw CsvError("csv: no data rows");

  Dataset data;
  const std::size_t d = header.size() - 1;
  data.features = Matrix(labels.size(), d);
  data.features.data() = std::move(values);
  data.labels = std::move(labels);
  data.num_classes =
      static_cast<std::size_t>(*std::max_element(data.labels.begin(), data.labels.end())) + 1;
  data.num_classes = std::max<std::size_t>(data.num_classes, 2);
  if (scale) MinMaxScale(data.features);
  data.Validate();
  return data;
}

Dataset LoadCsvDataset(const std::string& path, bool scale) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open dataset '" + path + "'");
  return ReadCsvDataset(in, scale);
}

JointVflModel::JointVflModel(FeatureSplit split, HeadKind head,
                             std::vector<Model> parties,
                             std::optional<DenseLayer> head_layer,
                             std::size_t num_classes)
    : split_(std::move(split)),
      head_(head),
      parties_(std::move(parties)),
      head_layer_(std::move(head_layer)),
      num_classes_(num_classes) {
  split_.Validate(split_.total_dims());
  if (parties_.size() != split_.num_parties()) {
    throw std::invalid_argument("one sub-model per party required");
  }
  std::size_t embed_total = 0;
  for (std::size_t p = 0; p < parties_.size(); ++p) {
    if (parties_[p].spec().input_dim != split_.party_slices[p].size()) {
      throw std::invalid_argument("sub-model input does not match its feature slice");
    }
    embed_total += parties_[p].spec().output_dim;
    if (head_ == HeadKind::kSumLogits && parties_[p].spec().output_dim != num_classes_) {
      throw std::invalid_argument("sum-logits sub-models must emit K logits");
    }
  }
  if (head_ == HeadKind::kConcatHead) {
    if (!head_layer_ || head_layer_->in_dim() != embed_total ||
        head_layer_->out_dim() != num_classes_) {
      throw std::invalid_argument("concat head must map all embeddings to K logits");
    }
  }
}

JointVflModel JointVflModel::Initialize(const FeatureSplit& split,
                                        const VflModelSpec& spec,
                                        std::size_t num_classes, Rng& rng) {
  const std::size_t d = split.total_dims();
  std::vector<Model> parties;
  if (spec.head == HeadKind::kSumLogits) {
    const DenseLayer full = DenseLayer::Initialize(d, num_classes, rng);
    for (std::size_t p = 0; p < split.num_parties(); ++p) {
      const auto& slice = split.party_slices[p];
      DenseLayer layer = DenseLayer::Zeros(slice.size(), num_classes);
      for (std::size_t r = 0; r < num_classes; ++r) {
        for (std::size_t c = 0; c < slice.size(); ++c) {
          layer.weights(r, c) = full.weights(r, slice[c]);
        }
      }
      if (p == split.active_index) layer.biases = full.biases;
      ModelSpec ms{ModelKind::kLinear, slice.size(), num_classes, 0};
      parties.emplace_back(ms, std::vector<DenseLayer>{std::move(layer)});
    }
    return JointVflModel(split, spec.head, std::move(parties), std::nullopt,
                         num_classes);
  }
  for (std::size_t p = 0; p < split.num_parties(); ++p) {
    ModelSpec ms{ModelKind::kMlp1, split.party_slices[p].size(),
                 spec.embedding_dim, spec.hidden_units};
    parties.push_back(Model::Initialize(ms, rng));
  }
  DenseLayer head = DenseLayer::Initialize(spec.embedding_dim * split.num_parties(),
                                           num_classes, rng);
  return JointVflModel(split, spec.head, std::move(parties), std::move(head),
                       num_classes);
}

std::vector<std::vector<double>> JointVflModel::Partition(
    std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) +
                                " features, model expects " +
                                std::to_string(input_dim()));
  }
  std::vector<std::vector<double>> parts(split_.num_parties());
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (std::size_t idx : split_.party_slices[p]) parts[p].push_back(x[idx]);
  }
  return parts;
}

std::vector<double> JointVflModel::Logits(
    const std::vector<std::vector<double>>& parts) const {
  if (parts.size() != parties_.size()) {
    throw std::invalid_argument("one feature slice per party required");
  }
  if (head_ == HeadKind::kSumLogits) {
    std::vector<double> logits(num_classes_, 0.0);
    for (std::size_t p = 0; p < parties_.size(); ++p) {
      const std::vector<double> out = parties_[p].Forward(parts[p]);
      for (std::size_t k = 0; k < num_classes_; ++k) logits[k] += out[k];
    }
    return logits;
  }
  std::vector<double> concat;
  for (std::size_t p = 0; p < parties_.size(); ++p) {
    const std::vector<double> out = parties_[p].Forward(parts[p]);
    concat.insert(concat.end(), out.begin(), out.end());
  }
  return head_layer_->Forward(concat);
}

std::vector<double> JointVflModel::Logits(std::span<const double> x) const {
  return Logits(Partition(x));
}

JointVflModel::Gradient JointVflModel::Backward(
    const std::vector<std::vector<double>>& parts,
    std::span<const double> grad_logits) const {
  Gradient grad;
  if (head_ == HeadKind::kSumLogits) {
    for (std::size_t p = 0; p < parties_.size(); ++p) {
      grad.parties.push_back(parties_[p].Backward(parts[p], grad_logits));
      // Passive parties carry no bias; keeps the sum equal to one affine map.
      if (p != split_.active_index) {
        std::fill(grad.parties.back().layers[0].biases.begin(),
                  grad.parties.back().layers[0].biases.end(), 0.0);
      }
    }
    return grad;
  }
  std::vector<double> concat;
  for (std::size_t p = 0; p < parties_.size(); ++p) {
    const std::vector<double> out = parties_[p].Forward(parts[p]);
    concat.insert(concat.end(), out.begin(), out.end());
  }
  DenseLayer head_grad = DenseLayer::Zeros(head_layer_->in_dim(), num_classes_);
  std::vector<double> grad_concat(concat.size(), 0.0);
  for (std::size_t r = 0; r < num_classes_; ++r) {
    head_grad.biases[r] = grad_logits[r];
    for (std::size_t c = 0; c < concat.size(); ++c) {
      head_grad.weights(r, c) = grad_logits[r] * concat[c];
      grad_concat[c] += head_layer_->weights(r, c) * grad_logits[r];
    }
  }
  grad.head = std::move(head_grad);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parties_.size(); ++p) {
    const std::size_t width = parties_[p].spec().output_dim;
    std::span<const double> upstream(grad_concat.data() + offset, width);
    grad.parties.push_back(parties_[p].Backward(parts[p], upstream));
    offset += width;
  }
  return grad;
}

std::vector<double> JointVflModel::InputGradient(
    std::span<const double> x, std::span<const double> grad_logits) const {
  const auto parts = Partition(x);
  std::vector<double> out(input_dim(), 0.0);
  std::vector<double> grad_concat;
  if (head_ == HeadKind::kConcatHead) {
    grad_concat.assign(head_layer_->in_dim(), 0.0);
    for (std::size_t r = 0; r < num_classes_; ++r) {
      const auto wr = head_layer_->weights.row(r);
      for (std::size_t c = 0; c < wr.size(); ++c) grad_concat[c] += wr[c] * grad_logits[r];
    }
  }
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parties_.size(); ++p) {
    std::vector<double> g;
    if (head_ == HeadKind::kSumLogits) {
      g = parties_[p].InputGradient(parts[p], grad_logits);
    } else {
      const std::size_t width = parties_[p].spec().output_dim;
      g = parties_[p].InputGradient(
          parts[p], std::span<const double>(grad_concat.data() + offset, width));
      offset += width;
    }
    const auto& slice = split_.party_slices[p];
    for (std::size_t c = 0; c < slice.size(); ++c) out[slice[c]] = g[c];
  }
  return out;
}

void JointVflModel::ApplyGradient(const Gradient& grad, double step) {
  for (std::size_t p = 0; p < parties_.size(); ++p) {
    parties_[p].ApplyGradient(grad.parties[p], step);
  }
  if (head_layer_ && grad.head) {
    auto& w = head_layer_->weights.data();
    const auto& gw = grad.head->weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * gw[i];
    for (std::size_t i = 0; i < head_layer_->biases.size(); ++i) {
      head_layer_->biases[i] -= step * grad.head->biases[i];
    }
  }
}

bool JointVflModel::AllFinite() const {
  for (const auto& m : parties_) {
    if (!m.AllFinite()) return false;
  }
  if (head_layer_) {
    for (double w : head_layer_->weights.data()) {
      if (!std::isfinite(w)) return false;
    }
  }
  return true;
}

bool JointVflModel::operator==(const JointVflModel& other) const {
  return head_ == other.head_ && parties_ == other.parties_ &&
         head_layer_ == other.head_layer_;
}

namespace {

JointVflModel::Gradient ZeroJointGradient(const JointVflModel& model) {
  JointVflModel::Gradient g;
  for (const auto& m : model.parties()) g.parties.push_back(ZeroGradient(m));
  if (model.head_layer()) {
    g.head = DenseLayer::Zeros(model.head_layer()->in_dim(), model.num_classes());
  }
  return g;
}

void AccumulateJoint(JointVflModel::Gradient& acc,
                     const JointVflModel::Gradient& g, double scale) {
  for (std::size_t p = 0; p < acc.parties.size(); ++p) {
    Accumulate(acc.parties[p], g.parties[p], scale);
  }
  if (acc.head) {
    auto& w = acc.head->weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += scale * g.head->weights.data()[i];
    for (std::size_t i = 0; i < acc.head->biases.size(); ++i) {
      acc.head->biases[i] += scale * g.head->biases[i];
    }
  }
}

double TrainAccuracy(const JointVflModel& model, const Dataset& data) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (Argmax(model.Logits(data.features.row(i))) ==
        static_cast<std::size_t>(data.labels[i])) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace

TrainResult TrainVfl(const Dataset& train, const FeatureSplit& split,
                     const VflModelSpec& spec, const TrainConfig& config,
                     std::uint64_t seed) {
  train.Validate();
  split.Validate(train.dims());
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");

  Rng init_rng(seed);
  TrainResult result{JointVflModel::Initialize(split, spec, train.num_classes, init_rng), {}};
  JointVflModel& model = result.model;

  Rng order_rng(seed + 1);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      JointVflModel::Gradient acc = ZeroJointGradient(model);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        // Parties forward their slices; the coordinator computes the loss
        // and sends dL/dlogits back.
        const auto parts = model.Partition(train.features.row(i));
        const std::vector<double> logits = model.Logits(parts);
        for (double z : logits) {
          if (!std::isfinite(z)) {
            throw TrainingDiverged("non-finite logits at epoch " + std::to_string(epoch));
          }
        }
        const ConfidenceVector probs = Softmax(logits);
        const LossAndGradient lg =
            CrossEntropyWithGrad(probs, static_cast<std::size_t>(train.labels[i]));
        if (!std::isfinite(lg.loss)) {
          throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch));
        }
        AccumulateJoint(acc, model.Backward(parts, lg.logit_gradient), scale);
      }
      model.ApplyGradient(acc, config.learning_rate);
    }
    if (!model.AllFinite()) {
      throw TrainingDiverged("non-finite parameters after epoch " + std::to_string(epoch));
    }
    result.epoch_accuracy.push_back(TrainAccuracy(model, train));
  }
  return result;
}

ConfidenceVector PredictScores(const JointVflModel& model,
                               std::span<const double> x) {
  return Softmax(model.Logits(x));
}

TransformedScores Infer(const JointVflModel& model,
                        const std::vector<std::vector<double>>& parts,
                        const DefenseKind& defense, Rng& rng) {
  const ConfidenceVector scores = Softmax(model.Logits(parts));
  // Transport to the parties would sit here; in-process it is a pass-through.
  return Defend(scores, defense, rng);
}

std::size_t Argmax(std::span<const double> scores) {
  return static_cast<std::size_t>(
      std::max_element(scores.begin(), scores.end()) - scores.begin());
}

double EvaluateAccuracy(const JointVflModel& model, const Dataset& data,
                        const DefenseKind& defense, Rng& rng) {
  if (data.size() == 0) throw std::invalid_argument("evaluation set is empty");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const TransformedScores out =
        Infer(model, model.Partition(data.features.row(i)), defense, rng);
    if (Argmax(out.values) == static_cast<std::size_t>(data.labels[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace scorelab
