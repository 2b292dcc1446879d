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

#include "scorelab/defense.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace scorelab {
namespace {

// Uniform draw in [lo, hi).
double UniformIn(Rng& rng, double lo, double hi) {
  const double unit = std::generate_canonical<double, 53>(rng);
  const double v = lo + (hi - lo) * unit;
  return v < hi ? v : std::nextafter(hi, lo);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void PrivacyBudget::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw std::invalid_argument("sensitivity must be positive");
  }
}

double GaussianSigma(const PrivacyBudget& budget) {
  // The log term is non-positive for delta >= 1.25; reject before Validate so
  // the message names the real problem.
  if (budget.delta >= 1.25) {
    throw std::invalid_argument("delta >= 1.25 makes ln(1.25/delta) non-positive");
  }
  budget.Validate();
  const double log_term = std::log(1.25 / budget.delta);
  return std::sqrt(2.0 * log_term * budget.sensitivity * budget.sensitivity /
                   (budget.epsilon * budget.epsilon));
}

void PerturbationPlan::Validate(std::size_t k) const {
  if (sigmas.size() != k) {
    throw std::invalid_argument("plan has " + std::to_string(sigmas.size()) +
                                " scales for " + std::to_string(k) + " classes");
  }
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("noise scales must be finite and >= 0");
    }
  }
  if (mode == BudgetMode::kUniform &&
      std::adjacent_find(sigmas.begin(), sigmas.end(),
                         std::not_equal_to<>()) != sigmas.end()) {
    throw std::invalid_argument("uniform plan requires equal scales");
  }
}

PerturbationPlan UniformPlan(TransformKind kind, std::size_t k,
                             const PrivacyBudget& budget) {
  return PerturbationPlan{kind, std::vector<double>(k, GaussianSigma(budget)),
                          BudgetMode::kUniform};
}

std::vector<double> LogSpacedEpsilons(std::size_t k, double eps_min,
                                      double eps_max) {
  if (k < 2) throw std::invalid_argument("K must be >= 2");
  if (!(eps_min > 0.0) || !(eps_max >= eps_min)) {
    throw std::invalid_argument("need 0 < eps_min <= eps_max");
  }
  std::vector<double> eps(k);
  const double lo = std::log(eps_min);
  const double hi = std::log(eps_max);
  for (std::size_t j = 0; j < k; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(k - 1);
    eps[j] = std::exp(lo + t * (hi - lo));
  }
  eps.front() = eps_min;
  eps.back() = eps_max;
  return eps;
}

PerturbationPlan PerClassPlan(TransformKind kind,
                              std::span<const double> epsilons, double delta,
                              double sensitivity) {
  PerturbationPlan plan{kind, {}, BudgetMode::kPerClass};
  plan.sigmas.reserve(epsilons.size());
  for (double eps : epsilons) {
    plan.sigmas.push_back(GaussianSigma({eps, delta, sensitivity}));
  }
  return plan;
}

NoiseDraw SampleNoise(const ConfidenceVector& c, Rng& rng, SamplingMode mode) {
  const std::size_t k = c.size();
  const RankVector rank = Rank(c);
  const double width = 1.0 / static_cast<double>(k);
  NoiseDraw draw;
  draw.u.resize(k);
  draw.interval_indices.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const int interval = static_cast<int>(k) + 1 - rank.ranks[j];
    const double lo = (interval - 1) * width;
    const double hi = interval * width;
    draw.interval_indices[j] = interval;
    draw.u[j] = mode == SamplingMode::kMidpoint ? 0.5 * (lo + hi)
                                                : UniformIn(rng, lo, hi);
  }
  return draw;
}

std::vector<double> AssignSigmasByRank(const PerturbationPlan& plan,
                                       const ConfidenceVector& c) {
  const RankVector rank = Rank(c);
  std::vector<double> sorted = plan.sigmas;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = c.size();
  std::vector<double> assigned(k);
  for (std::size_t j = 0; j < k; ++j) {
    // Rank K (least confident) takes sorted[0].
    assigned[j] = sorted[k - static_cast<std::size_t>(rank.ranks[j])];
  }
  return assigned;
}

TransformedScores PriveePerturb(const ConfidenceVector& c,
                                const PerturbationPlan& plan,
                                const NoiseDraw& draw) {
  const std::size_t k = c.size();
  plan.Validate(k);
  if (draw.u.size() != k) throw std::invalid_argument("noise draw size mismatch");

  std::vector<double> sigma;
  if (plan.mode == BudgetMode::kUniform) {
    sigma = plan.sigmas;
  } else {
    sigma = AssignSigmasByRank(plan, c);
  }

  double shift = 0.0;
  if (plan.kind == TransformKind::kReflection) {
    const double total = std::accumulate(c.values().begin(), c.values().end(), 0.0);
    shift = 2.0 / static_cast<double>(k) * total;
  }
  // (A + diag(u * sigma)) c, with A c = c - shift. Written as
  // c_j * (1 + u_j sigma_j) - shift so each entry is monotone in c_j even
  // after rounding.
  TransformedScores out;
  out.values.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    out.values[j] = c[j] * (1.0 + draw.u[j] * sigma[j]) - shift;
  }
  return out;
}

TransformedScores PriveePerturb(const ConfidenceVector& c,
                                const PerturbationPlan& plan, Rng& rng,
                                SamplingMode mode) {
  return PriveePerturb(c, plan, SampleNoise(c, rng, mode));
}

std::string DefenseName(const DefenseKind& kind) {
  return std::visit(
      Overloaded{
          [](const defense::None&) { return std::string("none"); },
          [](const defense::PriveeDp&) { return std::string("privee-dp"); },
          [](const defense::PriveeDpPlusPlus&) {
            return std::string("privee-dp++");
          },
          [](const defense::Round& r) {
            return "round(" + std::to_string(r.digits) + ")";
          },
          [](const defense::GaussianDp&) { return std::string("gaussian-dp"); },
          [](const defense::MonotoneEncode&) {
            return std::string("monotone-encode");
          },
      },
      kind);
}

void ValidateDefense(const DefenseKind& kind) {
  std::visit(Overloaded{
                 [](const defense::None&) {},
                 [](const defense::PriveeDp& d) { d.budget.Validate(); },
                 [](const defense::PriveeDpPlusPlus& d) {
                   LogSpacedEpsilons(2, d.epsilon_min, d.epsilon_max);
                   PrivacyBudget{d.epsilon_min, d.delta, d.sensitivity}.Validate();
                 },
                 [](const defense::Round& r) {
                   if (r.digits < 1 || r.digits > 12) {
                     throw std::invalid_argument("rounding digits must be in 1..12");
                   }
                 },
                 [](const defense::GaussianDp& d) { d.budget.Validate(); },
                 [](const defense::MonotoneEncode&) {},
             },
             kind);
}

bool PreservesArgmax(const DefenseKind& kind) {
  return std::holds_alternative<defense::None>(kind) ||
         std::holds_alternative<defense::PriveeDp>(kind) ||
         std::holds_alternative<defense::PriveeDpPlusPlus>(kind) ||
         std::holds_alternative<defense::MonotoneEncode>(kind);
}

double RoundToDigits(double value, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::round(value * scale) / scale;
}

TransformedScores AddNoise(const ConfidenceVector& c,
                           std::span<const double> noise) {
  if (noise.size() != c.size()) throw std::invalid_argument("noise size mismatch");
  TransformedScores out;
  out.values.resize(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) out.values[j] = c[j] + noise[j];
  return out;
}

MonotoneMap::MonotoneMap(std::uint64_t key, std::size_t breakpoints) {
  if (breakpoints < 2) throw std::invalid_argument("need >= 2 breakpoints");
  Rng rng(key);
  xs_.resize(breakpoints);
  ys_.resize(breakpoints);
  xs_.front() = 0.0;
  xs_.back() = 1.0;
  for (std::size_t i = 1; i + 1 < breakpoints; ++i) {
    xs_[i] = std::generate_canonical<double, 53>(rng);
  }
  std::sort(xs_.begin() + 1, xs_.end() - 1);
  for (std::size_t i = 1; i < breakpoints; ++i) {
    if (xs_[i] <= xs_[i - 1]) xs_[i] = std::nextafter(xs_[i - 1], 2.0);
  }
  // Random offset and per-segment slopes hide the original magnitudes.
  std::exponential_distribution<double> step(1.0);
  const double scale = UniformIn(rng, 1.0, 100.0);
  ys_[0] = UniformIn(rng, -50.0, 50.0);
  for (std::size_t i = 1; i < breakpoints; ++i) {
    ys_[i] = ys_[i - 1] + scale * (0.01 + step(rng));
  }
}

double MonotoneMap::operator()(double x) const {
  // Segment [xs_[i-1], xs_[i]] containing x; the end segments extrapolate.
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - xs_.begin());
  i = std::clamp<std::size_t>(i, 1, xs_.size() - 1);
  const double t = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
  return ys_[i - 1] + t * (ys_[i] - ys_[i - 1]);
}

TransformedScores Defend(const ConfidenceVector& c, const DefenseKind& kind,
                         Rng& rng) {
  const std::size_t k = c.size();
  return std::visit(
      Overloaded{
          [&](const defense::None&) {
            return TransformedScores{{c.values().begin(), c.values().end()}};
          },
          [&](const defense::PriveeDp& d) {
            return PriveePerturb(c, UniformPlan(d.kind, k, d.budget), rng,
                                 d.sampling);
          },
          [&](const defense::PriveeDpPlusPlus& d) {
            const std::vector<double> eps =
                LogSpacedEpsilons(k, d.epsilon_min, d.epsilon_max);
            return PriveePerturb(
                c, PerClassPlan(d.kind, eps, d.delta, d.sensitivity), rng,
                d.sampling);
          },
          [&](const defense::Round& r) {
            ValidateDefense(r);
            TransformedScores out;
            out.values.reserve(k);
            for (double v : c.values()) out.values.push_back(RoundToDigits(v, r.digits));
            return out;
          },
          [&](const defense::GaussianDp& d) {
            std::normal_distribution<double> noise(0.0, GaussianSigma(d.budget));
            std::vector<double> draw(k);
            for (double& v : draw) v = noise(rng);
            return AddNoise(c, draw);
          },
          [&](const defense::MonotoneEncode& m) {
            const MonotoneMap map(m.key, k + 1);
            TransformedScores out;
            out.values.reserve(k);
            for (double v : c.values()) out.values.push_back(map(v));
            return out;
          },
      },
      kind);
}

std::size_t FeasibilityProbe(const TransformedScores& p, TransformKind kind,
                             int grid_resolution) {
  const std::size_t k = p.values.size();
  if (k < 2 || k > 3) {
    throw std::invalid_argument("feasibility probe supports K = 2 or 3 only");
  }
  if (grid_resolution < 1) throw std::invalid_argument("grid resolution must be >= 1");

  constexpr double kReproduceTol = 1e-6;
  const double shift =
      kind == TransformKind::kReflection ? 2.0 / static_cast<double>(k) : 0.0;
  const std::span<const double> pv = p.values;

  // On the simplex (A c)_j = c_j - shift, so p_j + shift = c_j (1 + n_j).
  std::vector<double> q(k);
  std::vector<std::size_t> positive;
  for (std::size_t j = 0; j < k; ++j) {
    q[j] = pv[j] + shift;
    if (q[j] < -kReproduceTol) return 0;
    if (q[j] > kReproduceTol) positive.push_back(j);
  }
  if (positive.empty()) return 0;
  // The largest entry absorbs the sum constraint; the others are enumerated.
  const std::size_t pivot = *std::max_element(
      positive.begin(), positive.end(),
      [&](std::size_t a, std::size_t b) { return q[a] < q[b]; });
  std::vector<std::size_t> free_idx;
  for (std::size_t j : positive) {
    if (j != pivot) free_idx.push_back(j);
  }

  // t_j = c_j / q_j = 1 / (1 + n_j), so zero-score entries carry c_j = 0.
  std::vector<double> t(k, 0.0);
  auto feasible = [&]() {
    double rest = 0.0;
    for (std::size_t j : free_idx) rest += q[j] * t[j];
    t[pivot] = (1.0 - rest) / q[pivot];
    if (!(t[pivot] > 0.0) || t[pivot] > 1.0 + 1e-12) return false;
    t[pivot] = std::min(t[pivot], 1.0);
    double c[3] = {0.0, 0.0, 0.0};
    double noise[3] = {0.0, 0.0, 0.0};
    double total = 0.0;
    for (std::size_t j : positive) {
      c[j] = q[j] * t[j];
      noise[j] = 1.0 / t[j] - 1.0;
      total += c[j];
    }
    const double s = kind == TransformKind::kReflection ? shift * total : 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (std::abs(c[j] - s + noise[j] * c[j] - pv[j]) > kReproduceTol) return false;
    }
    for (std::size_t i : positive) {
      for (std::size_t j : positive) {
        if (pv[i] < pv[j] && noise[i] > noise[j]) return false;
      }
    }
    return true;
  };

  const double g = static_cast<double>(grid_resolution);
  std::size_t count = 0;
  if (free_idx.empty()) {
    if (feasible()) ++count;
  } else if (free_idx.size() == 1) {
    for (int a = 1; a <= grid_resolution; ++a) {
      t[free_idx[0]] = a / g;
      if (feasible()) ++count;
    }
  } else {
    for (int a = 1; a <= grid_resolution; ++a) {
      t[free_idx[0]] = a / g;
      for (int b = 1; b <= grid_resolution; ++b) {
        t[free_idx[1]] = b / g;
        if (feasible()) ++count;
      }
    }
  }
  return count;
}

}  // namespace scorelab
