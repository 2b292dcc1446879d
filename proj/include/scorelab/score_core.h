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

#ifndef SCORELAB_SCORE_CORE_H_
#define SCORELAB_SCORE_CORE_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace scorelab {

// Absolute tolerance on the sum of a confidence vector.
inline constexpr double kSimplexTolerance = 1e-9;

// A length-K probability vector, K >= 2. Construction validates the simplex
// invariants and throws std::invalid_argument on violation.
class ConfidenceVector {
 public:
  explicit ConfidenceVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

// Per-class rank, 1-based: the most confident class has rank 1.
struct RankVector {
  std::vector<int> ranks;
};

enum class TransformKind {
  kIdentity,
  // A = I - (2/K) * 1 * 1^T.
  kReflection,
};

std::string_view TransformKindName(TransformKind kind);
TransformKind ParseTransformKind(std::string_view name);

// Output of an order-preserving transform. Not on the simplex in general.
struct TransformedScores {
  std::vector<double> values;
};

// Class indices sorted by descending score; equal scores keep ascending index
// order.
std::vector<std::size_t> ArgsortDescending(std::span<const double> scores);

// Ranks such that r_i < r_j whenever s_i > s_j. Exact ties are ranked by
// ascending class index. Throws std::invalid_argument when K < 2.
RankVector Rank(std::span<const double> scores);
RankVector Rank(const ConfidenceVector& c);

// Returns A * c. The reflection is evaluated as c - (2/K)(sum c) in O(K).
TransformedScores ApplyTransform(TransformKind kind, const ConfidenceVector& c);

// Max-abs entry of A^T A - I for the materialized K x K matrix.
double OrthonormalityResidual(TransformKind kind, std::size_t k);

// True when every strict inequality source[i] > source[j] is kept as
// candidate[i] > candidate[j]. Entries that tie in `source` may land in any
// order. This is argsort equality modulo permutations inside tie groups.
bool PreservesOrder(std::span<const double> source,
                    std::span<const double> candidate);

}  // namespace scorelab

#endif  // SCORELAB_SCORE_CORE_H_
