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

#ifndef SCORELAB_BENCH_H_
#define SCORELAB_BENCH_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scorelab/defense.h"

namespace scorelab {

struct BenchPoint {
  std::string defense;
  std::size_t k = 0;
  std::size_t calls = 0;
  double mean_seconds = 0.0;
  double p95_seconds = 0.0;
};

struct BenchOptions {
  std::size_t calls = 1000;   // timed calls per point, >= 1000
  std::size_t warmup = 100;   // untimed calls before measuring
  std::uint64_t seed = 7;
};

// Times Defend() on random simplex vectors, one steady_clock interval per
// call. Vectors are drawn before timing starts. `ks` must be ascending.
std::vector<BenchPoint> BenchDefenseScaling(std::span<const DefenseKind> kinds,
                                            std::span<const std::size_t> ks,
                                            const BenchOptions& options);

// Least-squares slope of log(mean latency) against log(K).
double LogLogSlope(std::span<const BenchPoint> points);

// Header: defense,k,calls,mean_seconds,p95_seconds
void WriteBenchCsv(std::ostream& out, std::span<const BenchPoint> points);

}  // namespace scorelab

#endif  // SCORELAB_BENCH_H_
