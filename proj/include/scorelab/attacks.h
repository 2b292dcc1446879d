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

#ifndef SCORELAB_ATTACKS_H_
#define SCORELAB_ATTACKS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "scorelab/defense.h"
#include "scorelab/tensor_lite.h"
#include "scorelab/vfl.h"

namespace scorelab {

// Both attacks are run by the active party with white-box access to the
// joint model. They minimize || softmax(f(x_act, x_pas_hat)) - observed ||^2
// where `observed` is the broadcast vector exactly as received.

class AttackFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GiaConfig {
  double step_size = 0.05;
  std::size_t max_iters = 2000;
  // Stop once 20 consecutive accepted steps each improve the loss by less
  // than this amount.
  double tolerance = 1e-12;
  double clamp_lo = 0.0;
  double clamp_hi = 1.0;
  std::size_t restarts = 5;

  void Validate() const;
};

struct GiaResult {
  std::vector<double> x_pas;
  double loss = 0.0;
  std::size_t iterations = 0;
  std::vector<double> loss_trace;  // loss after each accepted step, best restart
};

struct GrnConfig {
  std::size_t hidden_units = 32;
  std::size_t epochs = 60;
  std::size_t batch_size = 16;
  double step_size = 0.05;
  // Each batch gradient is rescaled to at most this global l2 norm; 0
  // disables clipping.
  double clip_norm = 1.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct AttackReport {
  Matrix reconstruction;                   // n x d_target
  std::vector<double> per_sample_sq_error; // mean over target dims, per row
  double mse = 0.0;
  std::size_t iterations = 0;
  double wall_clock_seconds = 0.0;
};

// Full feature vector with the active slice from x_act and the passive union
// (FeatureSplit::PassiveIndices order) from x_pas.
std::vector<double> AssembleInput(const FeatureSplit& split,
                                  std::span<const double> x_act,
                                  std::span<const double> x_pas);

// Squared score-matching loss at x. When `grad_x` is non-null it receives
// dL/dx in the full feature layout.
double ScoreMatchLoss(const JointVflModel& model, std::span<const double> x,
                      std::span<const double> observed,
                      std::vector<double>* grad_x);

// Projected gradient descent on the passive features from `restarts`
// uniform starts in the clamp box. A step that raises the loss is rejected
// and the step size halved; an accepted step grows it by 20%. Restarts with
// a non-finite loss are dropped; AttackFailed if none survive.
GiaResult GiaAttack(const JointVflModel& model, std::span<const double> x_act,
                    std::span<const double> observed, const GiaConfig& config,
                    Rng& rng);

// GIA over every row; row i uses Rng(seed + i). `truth` holds the true
// passive features and is used only for scoring.
AttackReport RunGia(const JointVflModel& model, const Matrix& x_act,
                    const Matrix& observed, const Matrix& truth,
                    const GiaConfig& config, std::uint64_t seed);

struct GrnResult {
  Model generator;
  AttackReport report;
  std::vector<double> epoch_loss;
  std::size_t best_epoch = 0;
  bool diverged = false;
};

// Trains an Mlp1 generator G(x_act, observed) -> x_pas_hat on the attacker's
// pairs by backpropagating the score-matching loss through the frozen joint
// model, keeps the epoch with the lowest mean loss, and scores it on the
// evaluation rows.
GrnResult GrnAttack(const JointVflModel& model, const Matrix& train_x_act,
                    const Matrix& train_observed, const Matrix& eval_x_act,
                    const Matrix& eval_observed, const Matrix& eval_truth,
                    const GrnConfig& config);

// MSE of guessing 0.5 for every feature: mean of (x - 0.5)^2.
double RandomGuessBaseline(const Matrix& truth);

}  // namespace scorelab

#endif  // SCORELAB_ATTACKS_H_
