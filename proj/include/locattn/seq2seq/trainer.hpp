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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "locattn/metrics/metrics.hpp"
#include "locattn/seq2seq/model.hpp"
#include "locattn/seq2seq/task.hpp"

namespace locattn {

struct TrainConfig {
  std::size_t steps = 2000;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double lr_drop_fraction = 0.5;  // lr becomes lr_after_drop from here on
  double lr_after_drop = 5e-4;
  double clip_norm = 5.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Evaluates at step 0, every eval_interval steps and after the last step;
  // 0 disables evaluation.
  std::size_t eval_interval = 100;
  std::size_t eval_samples = 8;
  std::uint64_t eval_seed = 1000003;  // held-out set, shared across runs
  std::uint64_t seed = 0;
  // Free-running budget as a multiple of the teacher-forced step count.
  double max_steps_factor = 3.0;
};

// Success: coverage > 0.9, fewer than 3 backward jumps, and the attention
// peak tracks the known alignment (within one position) on at least 90% of
// teacher-forced steps.
inline constexpr double kSuccessCoverage = 0.9;
inline constexpr double kSuccessMaxViolations = 3.0;
inline constexpr double kSuccessTracking = 0.9;

struct EvalRecord {
  std::size_t step = 0;
  double train_loss = 0.0;  // mean squared error per feature, last batch
  double mcd_dtw = 0.0;     // mean over held-out samples, free-running
  double coverage = 0.0;    // mean over held-out samples, free-running
  double violations = 0.0;  // mean per sample
  double stalls = 0.0;      // mean per sample
  double tracking = 0.0;    // mean teacher-forced alignment accuracy
  bool success = false;
};

struct TrainResult {
  std::vector<double> losses;  // per step
  std::vector<EvalRecord> evals;
  std::vector<AlignmentTrace> traces;  // teacher-forced, first held-out sample
  bool diverged = false;
  std::string failure;
  std::size_t steps_completed = 0;
};

bool is_success(const EvalRecord& r);

// Adam with global-norm gradient clipping.
template <typename Real>
class Adam {
 public:
  Adam(ParameterSet<Real>& params, double beta1, double beta2, double epsilon);
  // Clips the accumulated gradients to clip_norm (if > 0), applies one
  // update and returns the pre-clip norm.
  double step(double learning_rate, double clip_norm);

 private:
  ParameterSet<Real>& params_;
  double beta1_;
  double beta2_;
  double epsilon_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

template <typename Real>
EvalRecord evaluate(Model<Real>& model, std::span<const Example> heldout,
                    double max_steps_factor = 3.0,
                    AlignmentTrace* first_trace = nullptr);

using EvalCallback = std::function<void(const EvalRecord&)>;

// Teacher-forced L2 training. Deterministic given config.seed. A
// non-finite loss stops training and is reported through `diverged`.
template <typename Real>
TrainResult train(Model<Real>& model, const SyntheticTask& task,
                  const TrainConfig& config, const EvalCallback& on_eval = {});

double learning_rate_at(const TrainConfig& config, std::size_t step);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace locattn
