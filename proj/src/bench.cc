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

#include "scorelab/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "scorelab/synthetic.h"

namespace scorelab {
namespace {

// Distinct inputs cycled through the timed loop.
constexpr std::size_t kInputPool = 32;

}  // namespace

std::vector<BenchPoint> BenchDefenseScaling(std::span<const DefenseKind> kinds,
                                            std::span<const std::size_t> ks,
                                            const BenchOptions& options) {
  if (ks.empty() || kinds.empty()) throw std::invalid_argument("nothing to benchmark");
  if (!std::is_sorted(ks.begin(), ks.end())) {
    throw std::invalid_argument("class counts must be ascending");
  }
  if (options.calls < 1000) throw std::invalid_argument("need at least 1000 timed calls");

  std::vector<BenchPoint> points;
  for (const DefenseKind& kind : kinds) {
    ValidateDefense(kind);
    for (std::size_t k : ks) {
      Rng input_rng(options.seed + k);
      std::vector<ConfidenceVector> inputs;
      for (std::size_t i = 0; i < kInputPool; ++i) {
        inputs.push_back(RandomSimplexVector(k, input_rng));
      }
      Rng rng(options.seed);
      double sink = 0.0;
      for (std::size_t i = 0; i < options.warmup; ++i) {
        sink += Defend(inputs[i % kInputPool], kind, rng).values[0];
      }
      std::vector<double> samples(options.calls);
      for (std::size_t i = 0; i < options.calls; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const TransformedScores out = Defend(inputs[i % kInputPool], kind, rng);
        const auto t1 = std::chrono::steady_clock::now();
        sink += out.values[0];
        samples[i] = std::chrono::duration<double>(t1 - t0).count();
      }
      if (!std::isfinite(sink)) throw std::runtime_error("defense produced non-finite output");

      BenchPoint point{DefenseName(kind), k, options.calls, 0.0, 0.0};
      double total = 0.0;
      for (double s : samples) total += s;
      point.mean_seconds = total / static_cast<double>(samples.size());
      const std::size_t idx = static_cast<std::size_t>(
          std::ceil(0.95 * static_cast<double>(samples.size()))) - 1;
      std::nth_element(samples.begin(), samples.begin() + idx, samples.end());
      point.p95_seconds = samples[idx];
      points.push_back(point);
    }
  }
  return points;
}

double LogLogSlope(std::span<const BenchPoint> points) {
  if (points.size() < 2) throw std::invalid_argument("slope needs at least 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(points.size());
  for (const BenchPoint& p : points) {
    const double x = std::log(static_cast<double>(p.k));
    const double y = std::log(p.mean_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("slope needs distinct class counts");
  return (n * sxy - sx * sy) / denom;
}

void WriteBenchCsv(std::ostream& out, std::span<const BenchPoint> points) {
  out << "defense,k,calls,mean_seconds,p95_seconds\n";
  out << std::setprecision(9);
  for (const BenchPoint& p : points) {
    out << p.defense << "," << p.k << "," << p.calls << "," << p.mean_seconds
        << "," << p.p95_seconds << "\n";
  }
}

}  // namespace scorelab
