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

#ifndef SCORELAB_DEFENSE_H_
#define SCORELAB_DEFENSE_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "scorelab/score_core.h"

namespace scorelab {

// Random source threaded through every randomized defense. Each concurrent
// task owns its own instance.
using Rng = std::mt19937_64;

struct PrivacyBudget {
  double epsilon = 0.1;
  double delta = 1e-5;
  double sensitivity = 1.0;  // l2 sensitivity

  // Throws std::invalid_argument unless epsilon > 0, 0 < delta < 1 and
  // sensitivity > 0.
  void Validate() const;
};

// Gaussian-mechanism scale sqrt(2 ln(1.25/delta) * sensitivity^2) / epsilon.
double GaussianSigma(const PrivacyBudget& budget);

enum class BudgetMode {
  kUniform,   // one epsilon shared by all classes
  kPerClass,  // one epsilon per class
};

// Parameters for one rank-aware diagonal perturbation.
//
// `sigmas` holds K non-negative scales. The perturbation never uses them by
// class position: they are sorted ascending and handed out by confidence, the
// least confident class receiving the smallest scale. That keeps the products
// u_j * sigma_j monotone in c_j for any choice of scales.
struct PerturbationPlan {
  TransformKind kind = TransformKind::kIdentity;
  std::vector<double> sigmas;
  BudgetMode mode = BudgetMode::kUniform;

  void Validate(std::size_t k) const;
};

PerturbationPlan UniformPlan(TransformKind kind, std::size_t k,
                             const PrivacyBudget& budget);

// K epsilons log-spaced over [eps_min, eps_max] (inclusive); K >= 2.
std::vector<double> LogSpacedEpsilons(std::size_t k, double eps_min,
                                      double eps_max);

// Maps each epsilon through GaussianSigma with shared delta and sensitivity.
PerturbationPlan PerClassPlan(TransformKind kind,
                              std::span<const double> epsilons, double delta,
                              double sensitivity);

enum class SamplingMode {
  kRandom,
  // Deterministic interval midpoints, for hand-checkable traces.
  kMidpoint,
};

struct NoiseDraw {
  std::vector<double> u;
  // 1-based sub-interval index k_j = K + 1 - rank_j; u_j lies in
  // [(k_j - 1)/K, k_j/K).
  std::vector<int> interval_indices;
};

NoiseDraw SampleNoise(const ConfidenceVector& c, Rng& rng,
                      SamplingMode mode = SamplingMode::kRandom);

// p_j = (A c)_j + u_j * sigma_(j) * c_j, with sigma_(j) the rank-assigned
// scale. The output is not renormalized.
TransformedScores PriveePerturb(const ConfidenceVector& c,
                                const PerturbationPlan& plan, Rng& rng,
                                SamplingMode mode = SamplingMode::kRandom);

// Same as above with a caller-supplied draw.
TransformedScores PriveePerturb(const ConfidenceVector& c,
                                const PerturbationPlan& plan,
                                const NoiseDraw& draw);

// Per-class scales after the rank-sorted assignment.
std::vector<double> AssignSigmasByRank(const PerturbationPlan& plan,
                                       const ConfidenceVector& c);

namespace defense {

struct None {};

struct PriveeDp {
  PrivacyBudget budget;
  TransformKind kind = TransformKind::kIdentity;
  SamplingMode sampling = SamplingMode::kRandom;
};

struct PriveeDpPlusPlus {
  double epsilon_min = 0.05;
  double epsilon_max = 0.5;
  double delta = 1e-5;
  double sensitivity = 1.0;
  TransformKind kind = TransformKind::kIdentity;
  SamplingMode sampling = SamplingMode::kRandom;
};

struct Round {
  int digits = 2;  // 1..12
};

struct GaussianDp {
  PrivacyBudget budget;
};

// Order-preserving encoding stand-in: a keyed strictly increasing
// piecewise-linear map with K+1 breakpoints, applied entrywise.
struct MonotoneEncode {
  std::uint64_t key = 0;
};

}  // namespace defense

using DefenseKind =
    std::variant<defense::None, defense::PriveeDp, defense::PriveeDpPlusPlus,
                 defense::Round, defense::GaussianDp, defense::MonotoneEncode>;

std::string DefenseName(const DefenseKind& kind);

// Throws std::invalid_argument for out-of-range parameters.
void ValidateDefense(const DefenseKind& kind);

// True for defenses that keep the argmax of every input.
bool PreservesArgmax(const DefenseKind& kind);

TransformedScores Defend(const ConfidenceVector& c, const DefenseKind& kind,
                         Rng& rng);

double RoundToDigits(double value, int digits);

// c + noise, entrywise. No clamping, no renormalization.
TransformedScores AddNoise(const ConfidenceVector& c,
                           std::span<const double> noise);

// Strictly increasing piecewise-linear map on [0, 1] derived from `key` with
// `breakpoints` knots. Evaluated by binary search.
class MonotoneMap {
 public:
  MonotoneMap(std::uint64_t key, std::size_t breakpoints);
  double operator()(double x) const;

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

// Counts (c, noise) pairs that reproduce `p` under `kind`:
//   p = (A + diag(n)) c,  c >= 0,  sum c = 1,  n >= 0,
//   n_i <= n_j whenever p_i < p_j.
// On the simplex each class satisfies c_j (1 + n_j) = p_j + shift, so the
// search enumerates the shrink factors t_j = 1 / (1 + n_j) on the grid
// {1/R, ..., 1} for all but the largest class, which is solved from
// sum c = 1. Classes whose p_j equals the bare shift get c_j = 0 with free
// noise. Every counted pair reproduces p within 1e-6. The ordering
// constraint admits equality so the noise-free generating pair is counted.
// K must be 2 or 3.
std::size_t FeasibilityProbe(const TransformedScores& p, TransformKind kind,
                             int grid_resolution);

}  // namespace scorelab

#endif  // SCORELAB_DEFENSE_H_
