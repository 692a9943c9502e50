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
#include <span>
#include <vector>

#include "locattn/numerics/primitives.hpp"

namespace locattn {

// Causal filter whose taps follow the beta-binomial distribution
// p(k) = C(n, k) B(k + alpha, n - k + beta) / B(alpha, beta), k = 0..n.
struct PriorFilter {
  std::vector<double> taps;
  double alpha = 0.0;
  double beta = 0.0;
  int n = 0;

  double mean() const;  // sum_k k * taps[k], analytically alpha n / (alpha + beta)
};

// Evaluated in log space via lgamma. Throws std::invalid_argument unless
// alpha > 0, beta > 0 and n >= 0.
PriorFilter beta_binomial_taps(double alpha, double beta, int n);

// Defaults: alpha = 0.1, beta = 0.9, n = 10 (11 taps, one step forward on
// average).
PriorFilter default_prior_filter();

// log(P * alpha_prev) with causal convolution, floored at kPriorLogitFloor.
std::vector<double> prior_logits(const PriorFilter& filter,
                                 std::span<const double> alpha_prev);

struct AlignmentMoments {
  double mean = 0.0;
  double stddev = 0.0;
};

AlignmentMoments alignment_moments(std::span<const double> weights);

// Alignment driven by the prior alone: starts one-hot at 0 and applies
// softmax(prior_logits(.)) per step. Returns steps + 1 snapshots.
std::vector<std::vector<double>> prior_rollout(const PriorFilter& filter,
                                               std::size_t steps,
                                               std::size_t length);

}  // namespace locattn
