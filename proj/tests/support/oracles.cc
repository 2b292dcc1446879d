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

#include "support/oracles.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scorelab::oracle {

std::vector<double> Simplex(std::size_t k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> v(k);
  double total = 0.0;
  for (double& x : v) {
    x = -std::log(1.0 - unif(rng));
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

double Norm(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

double RelativeError(std::span<const double> a, std::span<const double> b) {
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const double scale = std::max(Norm(a), Norm(b));
  return scale == 0.0 ? 0.0 : Norm(diff) / scale;
}

std::vector<double> NumericGradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

std::vector<double> NaiveAffine(const Matrix& w, std::span<const double> b,
                                std::span<const double> x) {
  std::vector<double> out(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    long double s = b[r];
    for (std::size_t c = 0; c < w.cols(); ++c) s += static_cast<long double>(w(r, c)) * x[c];
    out[r] = static_cast<double>(s);
  }
  return out;
}

std::vector<double> NaiveSoftmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<long double> e(z.size());
  long double total = 0.0L;
  for (std::size_t i = 0; i < z.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(z[i]) - m);
    total += e[i];
  }
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = static_cast<double>(e[i] / total);
  return out;
}

DenseLayer TrainCentralizedLr(const Dataset& data, std::size_t epochs,
                              std::size_t batch_size, double learning_rate,
                              std::uint64_t seed) {
  const std::size_t d = data.dims();
  const std::size_t k = data.num_classes;
  Rng init(seed);
  DenseLayer layer = DenseLayer::Initialize(d, k, init);
  Rng order_rng(seed + 1);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      Matrix gw(k, d);
      std::vector<double> gb(k, 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        const auto x = data.features.row(i);
        std::vector<double> z(k);
        for (std::size_t r = 0; r < k; ++r) {
          double s = layer.biases[r];
          for (std::size_t c = 0; c < d; ++c) s += layer.weights(r, c) * x[c];
          z[r] = s;
        }
        std::vector<double> p = NaiveSoftmax(z);
        p[static_cast<std::size_t>(data.labels[i])] -= 1.0;
        for (std::size_t r = 0; r < k; ++r) {
          for (std::size_t c = 0; c < d; ++c) gw(r, c) += scale * p[r] * x[c];
          gb[r] += scale * p[r];
        }
      }
      for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < d; ++c) layer.weights(r, c) -= learning_rate * gw(r, c);
        layer.biases[r] -= learning_rate * gb[r];
      }
    }
  }
  return layer;
}

DenseLayer GatherSumLogits(const JointVflModel& model) {
  const std::size_t k = model.num_classes();
  DenseLayer full = DenseLayer::Zeros(model.input_dim(), k);
  const FeatureSplit& split = model.split();
  for (std::size_t p = 0; p < split.num_parties(); ++p) {
    const DenseLayer& layer = model.parties()[p].layers()[0];
    const auto& slice = split.party_slices[p];
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < slice.size(); ++c) {
        full.weights(r, slice[c]) = layer.weights(r, c);
      }
      full.biases[r] += layer.biases[r];
    }
  }
  return full;
}

Dataset SeparableBlobs(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 0.3);
  Dataset data{Matrix(n, d), std::vector<int>(n), 2};
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    data.labels[i] = label;
    for (std::size_t c = 0; c < d; ++c) {
      data.features(i, c) = (label == 0 ? 0.0 : 0.7) + jitter(rng);
    }
  }
  return data;
}

}  // namespace scorelab::oracle
