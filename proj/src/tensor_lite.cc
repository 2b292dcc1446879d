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

#include "scorelab/tensor_lite.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace scorelab {
namespace {

void CheckDim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                std::to_string(want) + ", got " +
                                std::to_string(got));
  }
}

// W^T g.
std::vector<double> TransposeTimes(const Matrix& w, std::span<const double> g) {
  std::vector<double> out(w.cols(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    const auto wr = w.row(r);
    for (std::size_t c = 0; c < w.cols(); ++c) out[c] += wr[c] * gr;
  }
  return out;
}

// Outer product g x^T written into `grad`.
void OuterInto(DenseLayer& grad, std::span<const double> g,
               std::span<const double> x) {
  for (std::size_t r = 0; r < grad.weights.rows(); ++r) {
    auto gr = grad.weights.row(r);
    for (std::size_t c = 0; c < gr.size(); ++c) gr[c] = g[r] * x[c];
    grad.biases[r] = g[r];
  }
}

}  // namespace

std::vector<double> DenseLayer::Forward(std::span<const double> x) const {
  CheckDim(x.size(), in_dim(), "dense layer input");
  std::vector<double> out(biases);
  for (std::size_t r = 0; r < weights.rows(); ++r) {
    const auto wr = weights.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < wr.size(); ++c) acc += wr[c] * x[c];
    out[r] += acc;
  }
  return out;
}

DenseLayer DenseLayer::Initialize(std::size_t in, std::size_t out, Rng& rng) {
  DenseLayer layer = Zeros(in, out);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : layer.weights.data()) w = dist(rng);
  for (double& b : layer.biases) b = dist(rng);
  return layer;
}

DenseLayer DenseLayer::Zeros(std::size_t in, std::size_t out) {
  return DenseLayer{Matrix(out, in), std::vector<double>(out, 0.0)};
}

void ModelSpec::Validate() const {
  if (input_dim < 1 || output_dim < 1) {
    throw std::invalid_argument("model dimensions must be >= 1");
  }
  if (kind == ModelKind::kMlp1 && hidden_units < 1) {
    throw std::invalid_argument("hidden units must be >= 1");
  }
}

Model::Model(ModelSpec spec, std::vector<DenseLayer> layers)
    : spec_(spec), layers_(std::move(layers)) {
  spec_.Validate();
  const std::size_t want = spec_.kind == ModelKind::kLinear ? 1 : 2;
  if (layers_.size() != want) throw std::invalid_argument("wrong layer count for model kind");
  CheckDim(layers_.front().in_dim(), spec_.input_dim, "model input");
  CheckDim(layers_.back().out_dim(), spec_.output_dim, "model output");
  if (want == 2) {
    CheckDim(layers_[0].out_dim(), spec_.hidden_units, "hidden layer");
    CheckDim(layers_[1].in_dim(), spec_.hidden_units, "output layer input");
  }
}

Model Model::Initialize(const ModelSpec& spec, Rng& rng) {
  spec.Validate();
  std::vector<DenseLayer> layers;
  if (spec.kind == ModelKind::kLinear) {
    layers.push_back(DenseLayer::Initialize(spec.input_dim, spec.output_dim, rng));
  } else {
    layers.push_back(DenseLayer::Initialize(spec.input_dim, spec.hidden_units, rng));
    layers.push_back(DenseLayer::Initialize(spec.hidden_units, spec.output_dim, rng));
  }
  return Model(spec, std::move(layers));
}

std::vector<double> Model::Forward(std::span<const double> x) const {
  CheckDim(x.size(), spec_.input_dim, "model input");
  if (spec_.kind == ModelKind::kLinear) return layers_[0].Forward(x);
  std::vector<double> hidden = layers_[0].Forward(x);
  for (double& h : hidden) h = std::max(h, 0.0);
  return layers_[1].Forward(hidden);
}

GradientBundle Model::Backward(std::span<const double> x,
                               std::span<const double> upstream) const {
  CheckDim(x.size(), spec_.input_dim, "model input");
  CheckDim(upstream.size(), spec_.output_dim, "upstream gradient");
  GradientBundle out = ZeroGradient(*this);
  if (spec_.kind == ModelKind::kLinear) {
    OuterInto(out.layers[0], upstream, x);
    out.input = TransposeTimes(layers_[0].weights, upstream);
    return out;
  }
  std::vector<double> pre = layers_[0].Forward(x);
  std::vector<double> hidden(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) hidden[i] = std::max(pre[i], 0.0);
  OuterInto(out.layers[1], upstream, hidden);
  std::vector<double> grad_hidden = TransposeTimes(layers_[1].weights, upstream);
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (pre[i] <= 0.0) grad_hidden[i] = 0.0;
  }
  OuterInto(out.layers[0], grad_hidden, x);
  out.input = TransposeTimes(layers_[0].weights, grad_hidden);
  return out;
}

std::vector<double> Model::InputGradient(std::span<const double> x,
                                         std::span<const double> upstream) const {
  CheckDim(upstream.size(), spec_.output_dim, "upstream gradient");
  if (spec_.kind == ModelKind::kLinear) {
    CheckDim(x.size(), spec_.input_dim, "model input");
    return TransposeTimes(layers_[0].weights, upstream);
  }
  std::vector<double> pre = layers_[0].Forward(x);
  std::vector<double> grad_hidden = TransposeTimes(layers_[1].weights, upstream);
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (pre[i] <= 0.0) grad_hidden[i] = 0.0;
  }
  return TransposeTimes(layers_[0].weights, grad_hidden);
}

void Model::ApplyGradient(const GradientBundle& grads, double step) {
  if (grads.layers.size() != layers_.size()) {
    throw std::invalid_argument("gradient layout does not match model");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& w = layers_[l].weights.data();
    const auto& gw = grads.layers[l].weights.data();
    CheckDim(gw.size(), w.size(), "weight gradient");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * gw[i];
    auto& b = layers_[l].biases;
    const auto& gb = grads.layers[l].biases;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= step * gb[i];
  }
}

bool Model::AllFinite() const {
  for (const auto& layer : layers_) {
    for (double w : layer.weights.data()) {
      if (!std::isfinite(w)) return false;
    }
    for (double b : layer.biases) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

GradientBundle ZeroGradient(const Model& model) {
  GradientBundle g;
  for (const auto& layer : model.layers()) {
    g.layers.push_back(DenseLayer::Zeros(layer.in_dim(), layer.out_dim()));
  }
  return g;
}

void Accumulate(GradientBundle& acc, const GradientBundle& g, double scale) {
  for (std::size_t l = 0; l < acc.layers.size(); ++l) {
    auto& w = acc.layers[l].weights.data();
    const auto& gw = g.layers[l].weights.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += scale * gw[i];
    auto& b = acc.layers[l].biases;
    const auto& gb = g.layers[l].biases;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += scale * gb[i];
  }
}

ConfidenceVector Softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return ConfidenceVector(std::move(out));
}

LossAndGradient CrossEntropyWithGrad(const ConfidenceVector& probs,
                                     std::size_t label) {
  if (label >= probs.size()) throw std::invalid_argument("label out of range");
  LossAndGradient out;
  out.loss = -std::log(std::max(probs[label], 1e-12));
  out.logit_gradient.assign(probs.values().begin(), probs.values().end());
  out.logit_gradient[label] -= 1.0;
  return out;
}

std::vector<double> SoftmaxBackward(std::span<const double> probs,
                                    std::span<const double> grad_probs) {
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * grad_probs[i];
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = probs[i] * (grad_probs[i] - dot);
  }
  return out;
}

void WriteModel(std::ostream& out, const Model& model) {
  const ModelSpec& spec = model.spec();
  out << "scorelab-model 1\n";
  out << "kind " << (spec.kind == ModelKind::kLinear ? "linear" : "mlp1")
      << " input " << spec.input_dim << " output " << spec.output_dim
      << " hidden " << spec.hidden_units << "\n";
  out << std::setprecision(17);
  for (const auto& layer : model.layers()) {
    out << "layer " << layer.out_dim() << " " << layer.in_dim() << "\n";
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      const auto row = layer.weights.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        out << (c ? " " : "") << row[c];
      }
      out << "\n";
    }
    for (std::size_t r = 0; r < layer.biases.size(); ++r) {
      out << (r ? " " : "") << layer.biases[r];
    }
    out << "\n";
  }
}

Model ReadModel(std::istream& in) {
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) {
      throw std::runtime_error("model checkpoint: expected '" + word + "'");
    }
  };
  expect("scorelab-model");
  int version = 0;
  if (!(in >> version) || version != 1) {
    throw std::runtime_error("model checkpoint: unsupported version");
  }
  ModelSpec spec;
  std::string kind;
  expect("kind");
  in >> kind;
  if (kind == "linear") {
    spec.kind = ModelKind::kLinear;
  } else if (kind == "mlp1") {
    spec.kind = ModelKind::kMlp1;
  } else {
    throw std::runtime_error("model checkpoint: unknown kind '" + kind + "'");
  }
  expect("input");
  in >> spec.input_dim;
  expect("output");
  in >> spec.output_dim;
  expect("hidden");
  in >> spec.hidden_units;
  const std::size_t n_layers = spec.kind == ModelKind::kLinear ? 1 : 2;
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l < n_layers; ++l) {
    expect("layer");
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols)) throw std::runtime_error("model checkpoint: bad layer header");
    DenseLayer layer = DenseLayer::Zeros(cols, rows);
    for (double& w : layer.weights.data()) {
      if (!(in >> w)) throw std::runtime_error("model checkpoint: truncated weights");
    }
    for (double& b : layer.biases) {
      if (!(in >> b)) throw std::runtime_error("model checkpoint: truncated biases");
    }
    layers.push_back(std::move(layer));
  }
  return Model(spec, std::move(layers));
}

}  // namespace scorelab
