// Copyright 2026 The locattn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "locattn/seq2seq/trainer.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace locattn {

bool is_success(const EvalRecord& r) {
  return r.coverage > kSuccessCoverage &&
         r.violations < kSuccessMaxViolations && r.tracking >= kSuccessTracking;
}

double learning_rate_at(const TrainConfig& config, std::size_t step) {
  const auto drop = static_cast<std::size_t>(
      config.lr_drop_fraction * static_cast<double>(config.steps));
  return step < drop ? config.learning_rate : config.lr_after_drop;
}

template <typename Real>
Adam<Real>::Adam(ParameterSet<Real>& params, double beta1, double beta2,
                 double epsilon)
    : params_(params), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto& p : params_) {
    m_.emplace_back(p.value.size(), 0.0);
    v_.emplace_back(p.value.size(), 0.0);
  }
}

template <typename Real>
double Adam<Real>::step(double learning_rate, double clip_norm) {
  double sq = 0.0;
  for (const auto& p : params_) {
    for (Real g : p.grad.values()) {
      sq += static_cast<double>(g) * static_cast<double>(g);
    }
  }
  const double norm = std::sqrt(sq);
  const double factor =
      clip_norm > 0.0 && norm > clip_norm ? clip_norm / norm : 1.0;
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t idx = 0;
  for (auto& p : params_) {
    auto& m = m_[idx];
    auto& v = v_[idx];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = static_cast<double>(p.grad[i]) * factor;
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double update =
          learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + epsilon_);
      p.value[i] = static_cast<Real>(static_cast<double>(p.value[i]) - update);
    }
    ++idx;
  }
  return norm;
}

template <typename Real>
EvalRecord evaluate(Model<Real>& model, std::span<const Example> heldout,
                    double max_steps_factor, AlignmentTrace* first_trace) {
  if (heldout.empty()) {
    throw std::invalid_argument("evaluate: empty held-out set");
  }
  const std::size_t r = model.config().frames_per_step;
  EvalRecord rec;
  for (std::size_t n = 0; n < heldout.size(); ++n) {
    const Example& ex = heldout[n];
    AlignmentTrace forced;
    {
      Tape<Real> tape;
      model.teacher_forced_loss(tape, ex, &forced);
    }
    rec.tracking += alignment_accuracy(forced, ex.step_positions(r));
    if (n == 0 && first_trace) {
      *first_trace = forced;
    }
    const auto budget = static_cast<std::size_t>(std::ceil(
        max_steps_factor * static_cast<double>(ex.decoder_steps(r))));
    Generation gen = model.generate(ex.symbols, std::max<std::size_t>(budget, 1));
    rec.mcd_dtw += mcd_dtw(gen.frames, ex.frames);
    const RobustnessScore score = robustness_score(gen.trace, ex.symbols.size());
    rec.coverage += score.coverage;
    rec.violations += static_cast<double>(score.violations);
    rec.stalls += static_cast<double>(score.stalls);
  }
  const auto count = static_cast<double>(heldout.size());
  rec.tracking /= count;
  rec.mcd_dtw /= count;
  rec.coverage /= count;
  rec.violations /= count;
  rec.stalls /= count;
  rec.success = is_success(rec);
  return rec;
}

template <typename Real>
TrainResult train(Model<Real>& model, const SyntheticTask& task,
                  const TrainConfig& config, const EvalCallback& on_eval) {
  if (config.batch_size == 0) {
    throw std::invalid_argument("train: batch_size must be positive");
  }
  if (task.config().feature_dim != model.config().feature_dim ||
      task.config().vocab_size > model.config().vocab_size) {
    throw std::invalid_argument("train: task does not match the model");
  }
  TrainResult result;
  const std::vector<Example> heldout =
      task.sample_set(config.eval_samples, config.eval_seed);
  std::mt19937_64 rng(config.seed);
  Adam<Real> adam(model.params(), config.adam_beta1, config.adam_beta2,
                  config.adam_epsilon);

  auto run_eval = [&](std::size_t step, double loss) {
    if (heldout.empty()) return;
    AlignmentTrace trace;
    EvalRecord rec = evaluate(model, heldout, config.max_steps_factor, &trace);
    rec.step = step;
    rec.train_loss = loss;
    result.evals.push_back(rec);
    result.traces.push_back(std::move(trace));
    if (on_eval) on_eval(rec);
  };

  const std::uint64_t base_steps = model.trained_steps();
  double last_loss = std::nan("");
  if (config.eval_interval > 0) {
    run_eval(0, last_loss);
  }
  Tape<Real> tape;
  for (std::size_t step = 0; step < config.steps; ++step) {
    model.params().zero_grad();
    tape.clear();
    std::vector<Var> losses;
    std::size_t elements = 0;
    try {
      for (std::size_t b = 0; b < config.batch_size; ++b) {
        Example ex = task.sample(rng);
        elements += ex.frames.size() * ex.frames.dim();
        losses.push_back(model.teacher_forced_loss(tape, ex));
      }
      Var total = tape.scale(tape.sum(tape.concat(losses)),
                             Real(1) / static_cast<Real>(elements));
      const double loss = static_cast<double>(tape.scalar(total));
      if (!std::isfinite(loss)) {
        throw std::domain_error("non-finite loss");
      }
      tape.backward(total);
      adam.step(learning_rate_at(config, step), config.clip_norm);
      result.losses.push_back(loss);
      last_loss = loss;
      result.steps_completed = step + 1;
      model.set_trained_steps(base_steps + step + 1);
      if (config.eval_interval > 0 && ((step + 1) % config.eval_interval == 0 ||
                                       step + 1 == config.steps)) {
        run_eval(step + 1, loss);
      }
    } catch (const std::domain_error& e) {
      // Numerical blow-up (non-finite loss, collapsed GMM width, ...).
      result.diverged = true;
      result.failure = std::string(e.what()) + " at step " + std::to_string(step);
      break;
    }
  }
  return result;
}

template class Adam<float>;
template class Adam<double>;
template EvalRecord evaluate(Model<float>&, std::span<const Example>, double,
                             AlignmentTrace*);
template EvalRecord evaluate(Model<double>&, std::span<const Example>, double,
                             AlignmentTrace*);
template TrainResult train(Model<float>&, const SyntheticTask&,
                           const TrainConfig&, const EvalCallback&);
template TrainResult train(Model<double>&, const SyntheticTask&,
                           const TrainConfig&, const EvalCallback&);

}  // namespace locattn
