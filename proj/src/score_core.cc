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

#include "scorelab/score_core.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scorelab {

ConfidenceVector::ConfidenceVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw std::invalid_argument("confidence vector needs at least 2 classes");
  }
  double sum = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("confidence entries must be finite and >= 0");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw std::invalid_argument("confidence entries must sum to 1, got " +
                                std::to_string(sum));
  }
}

std::string_view TransformKindName(TransformKind kind) {
  switch (kind) {
    case TransformKind::kIdentity:
      return "identity";
    case TransformKind::kReflection:
      return "reflection";
  }
  return "unknown";
}

TransformKind ParseTransformKind(std::string_view name) {
  if (name == "identity") return TransformKind::kIdentity;
  if (name == "reflection") return TransformKind::kReflection;
  throw std::invalid_argument("unknown transform kind: " + std::string(name));
}

std::vector<std::size_t> ArgsortDescending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

RankVector Rank(std::span<const double> scores) {
  if (scores.size() < 2) {
    throw std::invalid_argument("rank requires at least 2 classes");
  }
  // Double argsort: position in the descending order is the rank.
  const std::vector<std::size_t> order = ArgsortDescending(scores);
  RankVector out;
  out.ranks.resize(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    out.ranks[order[pos]] = static_cast<int>(pos) + 1;
  }
  return out;
}

RankVector Rank(const ConfidenceVector& c) { return Rank(c.values()); }

TransformedScores ApplyTransform(TransformKind kind, const ConfidenceVector& c) {
  TransformedScores out;
  out.values.assign(c.values().begin(), c.values().end());
  if (kind == TransformKind::kReflection) {
    const double k = static_cast<double>(c.size());
    const double total = std::accumulate(out.values.begin(), out.values.end(), 0.0);
    const double shift = 2.0 / k * total;
    for (double& v : out.values) v -= shift;
  }
  return out;
}

double OrthonormalityResidual(TransformKind kind, std::size_t k) {
  if (k < 2) throw std::invalid_argument("K must be >= 2");
  std::vector<double> a(k * k, 0.0);
  const double off = kind == TransformKind::kReflection ? 2.0 / static_cast<double>(k) : 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      a[i * k + j] = (i == j ? 1.0 : 0.0) - off;
    }
  }
  double residual = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t r = 0; r < k; ++r) dot += a[r * k + i] * a[r * k + j];
      residual = std::max(residual, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  return residual;
}

bool PreservesOrder(std::span<const double> source,
                    std::span<const double> candidate) {
  if (source.size() != candidate.size()) return false;
  const std::vector<std::size_t> order = ArgsortDescending(source);
  // Walk tie groups of `source` from the top; every member of a lower group
  // must sit strictly below every member of the groups above it.
  double floor_of_above = 0.0;
  bool have_above = false;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double group_min = candidate[order[i]];
    double group_max = candidate[order[i]];
    while (j < order.size() && source[order[j]] == source[order[i]]) {
      group_min = std::min(group_min, candidate[order[j]]);
      group_max = std::max(group_max, candidate[order[j]]);
      ++j;
    }
    if (have_above && !(group_max < floor_of_above)) return false;
    floor_of_above = group_min;
    have_above = true;
    i = j;
  }
  return true;
}

}  // namespace scorelab
