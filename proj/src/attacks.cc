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

#include "scorelab/attacks.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "scorelab/metrics.h"

namespace scorelab {
namespace {

constexpr std::size_t kPlateauWindow = 20;

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. Each
// index is handled by exactly one thread.
template <class Fn>
void ParallelFor(std::size_t n, Fn fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> Gather(std::span<const double> x,
                           const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(x[i]);
  return out;
}

}  // namespace

void GiaConfig::Validate() const {
  if (!(step_size > 0.0) || max_iters == 0 || !(tolerance > 0.0) || restarts == 0) {
    throw std::invalid_argument("GIA step, iterations, tolerance and restarts must be positive");
  }
  if (!(clamp_lo < clamp_hi)) throw std::invalid_argument("GIA clamp range is empty");
}

void GrnConfig::Validate() const {
  if (hidden_units == 0 || epochs == 0 || batch_size == 0 || !(step_size > 0.0)) {
    throw std::invalid_argument("GRN hidden units, epochs, batch size and step must be positive");
  }
  if (!(clip_norm >= 0.0)) throw std::invalid_argument("GRN clip norm must be >= 0");
}

std::vector<double> AssembleInput(const FeatureSplit& split,
                                  std::span<const double> x_act,
                                  std::span<const double> x_pas) {
  const auto& active = split.active();
  const std::vector<std::size_t> passive = split.PassiveIndices();
  if (x_act.size() != active.size() || x_pas.size() != passive.size()) {
    throw std::invalid_argument("attack input does not match the feature split");
  }
  std::vector<double> x(split.total_dims());
  for (std::size_t i = 0; i < active.size(); ++i) x[active[i]] = x_act[i];
  for (std::size_t i = 0; i < passive.size(); ++i) x[passive[i]] = x_pas[i];
  return x;
}

double ScoreMatchLoss(const JointVflModel& model, std::span<const double> x,
                      std::span<const double> observed,
                      std::vector<double>* grad_x) {
  if (observed.size() != model.num_classes()) {
    throw std::invalid_argument("observed scores have the wrong class count");
  }
  const std::vector<double> logits = model.Logits(x);
  if (!std::all_of(logits.begin(), logits.end(), [](double v) { return std::isfinite(v); })) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const ConfidenceVector s = Softmax(logits);
  std::vector<double> grad_s(s.size());
  double loss = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double diff = s[k] - observed[k];
    loss += diff * diff;
    grad_s[k] = 2.0 * diff;
  }
  if (grad_x != nullptr) {
    *grad_x = model.InputGradient(x, SoftmaxBackward(s.values(), grad_s));
  }
  return loss;
}

GiaResult GiaAttack(const JointVflModel& model, std::span<const double> x_act,
                    std::span<const double> observed, const GiaConfig& config,
                    Rng& rng) {
  config.Validate();
  const std::vector<std::size_t> passive = model.split().PassiveIndices();
  std::uniform_real_distribution<double> init(config.clamp_lo, config.clamp_hi);

  GiaResult best;
  best.loss = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t restart = 0; restart < config.restarts; ++restart) {
    std::vector<double> cand(passive.size());
    for (double& v : cand) v = init(rng);

    std::vector<double> x = AssembleInput(model.split(), x_act, cand);
    std::vector<double> grad;
    double loss = ScoreMatchLoss(model, x, observed, &grad);
    if (!std::isfinite(loss)) continue;

    GiaResult run;
    double step = config.step_size;
    std::size_t flat = 0;
    std::size_t iter = 0;
    bool failed = false;
    for (; iter < config.max_iters && loss > 0.0; ++iter) {
      const std::vector<double> g = Gather(grad, passive);
      bool accepted = false;
      while (step > 1e-14) {
        std::vector<double> trial(cand.size());
        for (std::size_t i = 0; i < cand.size(); ++i) {
          trial[i] = std::clamp(cand[i] - step * g[i], config.clamp_lo, config.clamp_hi);
        }
        std::vector<double> trial_x = AssembleInput(model.split(), x_act, trial);
        std::vector<double> trial_grad;
        const double trial_loss = ScoreMatchLoss(model, trial_x, observed, &trial_grad);
        if (!std::isfinite(trial_loss)) {
          failed = true;
          break;
        }
        if (trial_loss <= loss) {
          flat = loss - trial_loss < config.tolerance ? flat + 1 : 0;
          cand = std::move(trial);
          grad = std::move(trial_grad);
          loss = trial_loss;
          run.loss_trace.push_back(loss);
          step *= 1.2;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (failed || !accepted || flat >= kPlateauWindow) break;
    }
    if (failed) continue;
    any = true;
    if (loss < best.loss) {
      run.x_pas = std::move(cand);
      run.loss = loss;
      run.iterations = iter;
      best = std::move(run);
    }
  }
  if (!any) throw AttackFailed("every GIA restart produced a non-finite loss");
  return best;
}

AttackReport RunGia(const JointVflModel& model, const Matrix& x_act,
                    const Matrix& observed, const Matrix& truth,
                    const GiaConfig& config, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = x_act.rows();
  if (observed.rows() != n || truth.rows() != n) {
    throw std::invalid_argument("GIA inputs disagree on the number of rows");
  }
  AttackReport report;
  report.reconstruction = Matrix(n, model.split().PassiveIndices().size());
  std::vector<std::size_t> iterations(n, 0);
  ParallelFor(n, [&](std::size_t i) {
    Rng rng(seed + i);
    const GiaResult r = GiaAttack(model, x_act.row(i), observed.row(i), config, rng);
    std::copy(r.x_pas.begin(), r.x_pas.end(), report.reconstruction.row(i).begin());
    iterations[i] = r.iterations;
  });
  report.iterations = std::accumulate(iterations.begin(), iterations.end(), std::size_t{0});
  report.per_sample_sq_error = RowSquaredErrors(truth, report.reconstruction);
  report.mse = ReconstructionMse(truth, report.reconstruction);
  report.wall_clock_seconds = Seconds(start);
  return report;
}

namespace {

// Factor that brings the gradient's global l2 norm down to `clip`.
double ClipScale(const GradientBundle& g, double clip) {
  if (clip <= 0.0) return 1.0;
  double sq = 0.0;
  for (const DenseLayer& l : g.layers) {
    for (double w : l.weights.data()) sq += w * w;
    for (double b : l.biases) sq += b * b;
  }
  const double norm = std::sqrt(sq);
  return norm > clip ? clip / norm : 1.0;
}

std::vector<double> Concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

GrnResult GrnAttack(const JointVflModel& model, const Matrix& train_x_act,
                    const Matrix& train_observed, const Matrix& eval_x_act,
                    const Matrix& eval_observed, const Matrix& eval_truth,
                    const GrnConfig& config) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = train_x_act.rows();
  if (n == 0) throw std::invalid_argument("GRN attacker dataset is empty");
  if (train_observed.rows() != n || eval_observed.rows() != eval_x_act.rows() ||
      eval_truth.rows() != eval_x_act.rows()) {
    throw std::invalid_argument("GRN inputs disagree on the number of rows");
  }
  const std::vector<std::size_t> passive = model.split().PassiveIndices();
  const std::size_t d_act = model.split().active().size();
  const std::size_t k = model.num_classes();

  Rng init_rng(config.seed);
  const ModelSpec gen_spec{ModelKind::kMlp1, d_act + k, passive.size(), config.hidden_units};
  Model generator = Model::Initialize(gen_spec, init_rng);

  GrnResult result{generator, {}, {}, 0, false};
  double best_loss = std::numeric_limits<double>::infinity();
  Rng order_rng(config.seed + 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t steps = 0;

  for (std::size_t epoch = 0; epoch < config.epochs && !result.diverged; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_loss = 0.0;
    for (std::size_t b0 = 0; b0 < n; b0 += config.batch_size) {
      const std::size_t b1 = std::min(n, b0 + config.batch_size);
      const double scale = 1.0 / static_cast<double>(b1 - b0);
      GradientBundle acc = ZeroGradient(generator);
      for (std::size_t b = b0; b < b1; ++b) {
        const std::size_t i = order[b];
        const std::vector<double> gin = Concat(train_x_act.row(i), train_observed.row(i));
        const std::vector<double> x_hat = generator.Forward(gin);
        const std::vector<double> x = AssembleInput(model.split(), train_x_act.row(i), x_hat);
        std::vector<double> grad_x;
        const double loss = ScoreMatchLoss(model, x, train_observed.row(i), &grad_x);
        if (!std::isfinite(loss)) {
          result.diverged = true;
          break;
        }
        epoch_loss += loss;
        Accumulate(acc, generator.Backward(gin, Gather(grad_x, passive)), scale);
      }
      if (result.diverged) break;
      generator.ApplyGradient(acc, config.step_size * ClipScale(acc, config.clip_norm));
      ++steps;
      if (!generator.AllFinite()) {
        result.diverged = true;
        break;
      }
    }
    if (result.diverged) break;
    epoch_loss /= static_cast<double>(n);
    result.epoch_loss.push_back(epoch_loss);
    // The epoch loss is measured while the generator moves; it is the
    // attacker's only signal, the truth is never consulted.
    if (epoch_loss <= best_loss) {
      best_loss = epoch_loss;
      result.best_epoch = epoch;
      result.generator = generator;
    }
  }

  AttackReport& report = result.report;
  report.reconstruction = Matrix(eval_x_act.rows(), passive.size());
  for (std::size_t i = 0; i < eval_x_act.rows(); ++i) {
    const std::vector<double> x_hat =
        result.generator.Forward(Concat(eval_x_act.row(i), eval_observed.row(i)));
    std::copy(x_hat.begin(), x_hat.end(), report.reconstruction.row(i).begin());
  }
  report.iterations = steps;
  report.per_sample_sq_error = RowSquaredErrors(eval_truth, report.reconstruction);
  report.mse = ReconstructionMse(eval_truth, report.reconstruction);
  report.wall_clock_seconds = Seconds(start);
  return result;
}

double RandomGuessBaseline(const Matrix& truth) {
  if (truth.data().empty()) throw std::invalid_argument("baseline target is empty");
  double total = 0.0;
  for (double v : truth.data()) total += (v - 0.5) * (v - 0.5);
  return total / static_cast<double>(truth.data().size());
}

}  // namespace scorelab
