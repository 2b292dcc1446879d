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

#ifndef SCORELAB_SYNTHETIC_H_
#define SCORELAB_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>

#include "scorelab/defense.h"
#include "scorelab/vfl.h"

namespace scorelab {

// Gaussian blobs: each class center is drawn from N(0, margin^2) per
// dimension, each sample is its center plus N(0, 1) noise, and the columns
// are min-max scaled to [0, 1]. Labels are balanced (i mod K) and shuffled.
struct SyntheticSpec {
  std::size_t classes = 16;
  std::size_t dims = 12;
  std::size_t samples = 1000;
  double margin = 3.0;
  std::uint64_t seed = 1;

  void Validate() const;
};

Dataset MakeSynthetic(const SyntheticSpec& spec);

// Uniform draw from the probability simplex (normalized exponentials).
ConfidenceVector RandomSimplexVector(std::size_t k, Rng& rng);

}  // namespace scorelab

#endif  // SCORELAB_SYNTHETIC_H_
