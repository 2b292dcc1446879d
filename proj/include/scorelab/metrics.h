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

#ifndef SCORELAB_METRICS_H_
#define SCORELAB_METRICS_H_

#include <vector>

#include "scorelab/tensor_lite.h"

namespace scorelab {

// (1 / (n * d)) * sum (estimate - truth)^2. Throws std::invalid_argument on
// a shape mismatch or an empty matrix.
double ReconstructionMse(const Matrix& truth, const Matrix& estimate);

// Mean squared error of each row.
std::vector<double> RowSquaredErrors(const Matrix& truth, const Matrix& estimate);

}  // namespace scorelab

#endif  // SCORELAB_METRICS_H_
