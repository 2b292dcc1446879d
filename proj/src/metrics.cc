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

#include "scorelab/metrics.h"

#include <stdexcept>

namespace scorelab {
namespace {

void CheckShapes(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw std::invalid_argument("reconstruction shape does not match the target");
  }
  if (truth.rows() == 0 || truth.cols() == 0) {
    throw std::invalid_argument("reconstruction target is empty");
  }
}

}  // namespace

double ReconstructionMse(const Matrix& truth, const Matrix& estimate) {
  CheckShapes(truth, estimate);
  const auto& a = truth.data();
  const auto& b = estimate.data();
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = b[i] - a[i];
    total += diff * diff;
  }
  return total / static_cast<double>(a.size());
}

std::vector<double> RowSquaredErrors(const Matrix& truth, const Matrix& estimate) {
  CheckShapes(truth, estimate);
  std::vector<double> out(truth.rows(), 0.0);
  for (std::size_t r = 0; r < truth.rows(); ++r) {
    for (std::size_t c = 0; c < truth.cols(); ++c) {
      const double diff = estimate(r, c) - truth(r, c);
      out[r] += diff * diff;
    }
    out[r] /= static_cast<double>(truth.cols());
  }
  return out;
}

}  // namespace scorelab
