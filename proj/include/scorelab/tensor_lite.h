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

#ifndef SCORELAB_TENSOR_LITE_H_
#define SCORELAB_TENSOR_LITE_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scorelab/defense.h"
#include "scorelab/score_core.h"

namespace scorelab {

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct DenseLayer {
  Matrix weights;  // out x in
  std::vector<double> biases;

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }

  // W x + b.
  std::vector<double> Forward(std::span<const double> x) const;

  // Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static DenseLayer Initialize(std::size_t in, std::size_t out, Rng& rng);
  static DenseLayer Zeros(std::size_t in, std::size_t out);

  bool operator==(const DenseLayer&) const = default;
};

enum class ModelKind { kLinear, kMlp1 };

struct ModelSpec {
  ModelKind kind = ModelKind::kLinear;
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  std::size_t hidden_units = 32;  // used by kMlp1 only

  void Validate() const;
};

// Parameter gradients laid out like the model's layers, plus the gradient
// with respect to the input.
struct GradientBundle {
  std::vector<DenseLayer> layers;
  std::vector<double> input;
};

// Linear (one layer) or one-hidden-layer ReLU perceptron.
class Model {
 public:
  Model(ModelSpec spec, std::vector<DenseLayer> layers);

  static Model Initialize(const ModelSpec& spec, Rng& rng);

  const ModelSpec& spec() const { return spec_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  // Linear: W x + b. Mlp1: W2 relu(W1 x + b1) + b2.
  std::vector<double> Forward(std::span<const double> x) const;

  // Gradients of <upstream, Forward(x)> with respect to parameters and x.
  GradientBundle Backward(std::span<const double> x,
                          std::span<const double> upstream) const;

  // Input gradient only; skips parameter gradients.
  std::vector<double> InputGradient(std::span<const double> x,
                                    std::span<const double> upstream) const;

  // params -= step * grads.
  void ApplyGradient(const GradientBundle& grads, double step);

  bool AllFinite() const;

  bool operator==(const Model& other) const {
    return spec_.kind == other.spec_.kind && layers_ == other.layers_;
  }

 private:
  ModelSpec spec_;
  std::vector<DenseLayer> layers_;
};

GradientBundle ZeroGradient(const Model& model);
// acc += scale * g (parameter part only).
void Accumulate(GradientBundle& acc, const GradientBundle& g, double scale);

// Max-subtracted softmax.
ConfidenceVector Softmax(std::span<const double> logits);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> logit_gradient;  // p - onehot(label)
};

// -ln(max(p_label, 1e-12)) and its gradient with respect to the logits that
// produced `probs`.
LossAndGradient CrossEntropyWithGrad(const ConfidenceVector& probs,
                                     std::size_t label);

// Vector-Jacobian product of softmax: for s = softmax(z) and g = dL/ds,
// returns dL/dz = s * (g - <s, g>).
std::vector<double> SoftmaxBackward(std::span<const double> probs,
                                    std::span<const double> grad_probs);

// Text checkpoint format, version 1:
//
//   scorelab-model 1
//   kind <linear|mlp1> input <n> output <n> hidden <n>
//   layer <out> <in>
//   <out lines of `in` weights>
//   <one line of `out` biases>
//   ... one block per layer
//
// Values are written with 17 significant digits so parsing restores them
// bit-exactly.
void WriteModel(std::ostream& out, const Model& model);
Model ReadModel(std::istream& in);

}  // namespace scorelab

#endif  // SCORELAB_TENSOR_LITE_H_
