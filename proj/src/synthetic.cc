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

#include "scorelab/synthetic.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace scorelab {

void SyntheticSpec::Validate() const {
  if (classes < 2 || dims == 0 || samples == 0 || !(margin > 0.0)) {
    throw std::invalid_argument(
        "synthetic spec needs >= 2 classes and positive dims, samples, margin");
  }
}

Dataset MakeSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix centers(spec.classes, spec.dims);
  for (double& v : centers.data()) v = spec.margin * normal(rng);

  std::vector<int> labels(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    labels[i] = static_cast<int>(i % spec.classes);
  }
  std::shuffle(labels.begin(), labels.end(), rng);

  Dataset data;
  data.num_classes = spec.classes;
  data.features = Matrix(spec.samples, spec.dims);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const auto center = centers.row(static_cast<std::size_t>(labels[i]));
    for (std::size_t c = 0; c < spec.dims; ++c) {
      data.features(i, c) = center[c] + normal(rng);
    }
  }
  data.labels = std::move(labels);
  MinMaxScale(data.features);
  data.Validate();
  return data;
}

ConfidenceVector RandomSimplexVector(std::size_t k, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> v(k);
  double total = 0.0;
  for (double& x : v) {
    x = expo(rng);
    total += x;
  }
  for (double& x : v) x /= total;
  return ConfidenceVector(std::move(v));
}

}  // namespace scorelab
