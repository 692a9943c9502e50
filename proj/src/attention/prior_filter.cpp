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

#include "locattn/attention/prior_filter.hpp"

#include <cmath>
#include <stdexcept>

namespace locattn {
namespace {

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double PriorFilter::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    m += static_cast<double>(k) * taps[k];
  }
  return m;
}

PriorFilter beta_binomial_taps(double alpha, double beta, int n) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) ||
      !std::isfinite(beta)) {
    throw std::invalid_argument(
        "beta_binomial_taps: shape parameters must be positive");
  }
  if (n < 0) {
    throw std::invalid_argument("beta_binomial_taps: n must be >= 0");
  }
  PriorFilter f;
  f.alpha = alpha;
  f.beta = beta;
  f.n = n;
  f.taps.resize(static_cast<std::size_t>(n) + 1);
  const double log_norm = log_beta(alpha, beta);
  for (int k = 0; k <= n; ++k) {
    f.taps[k] = std::exp(log_choose(n, k) +
                         log_beta(k + alpha, n - k + beta) - log_norm);
  }
  return f;
}

PriorFilter default_prior_filter() { return beta_binomial_taps(0.1, 0.9, 10); }

std::vector<double> prior_logits(const PriorFilter& filter,
                                 std::span<const double> alpha_prev) {
  auto smoothed = conv1d<double>(alpha_prev, filter.taps, ConvMode::kCausal);
  for (double& v : smoothed) {
    v = log_floor(v, kPriorLogitFloor);
  }
  return smoothed;
}

AlignmentMoments alignment_moments(std::span<const double> weights) {
  double total = 0.0;
  double first = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    total += weights[j];
    first += static_cast<double>(j) * weights[j];
  }
  if (!(total > 0.0)) {
    return {};
  }
  const double mean = first / total;
  double second = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double d = static_cast<double>(j) - mean;
    second += d * d * weights[j];
  }
  return {mean, std::sqrt(second / total)};
}

std::vector<std::vector<double>> prior_rollout(const PriorFilter& filter,
                                               std::size_t steps,
                                               std::size_t length) {
  if (length == 0) {
    throw std::invalid_argument("prior_rollout: length must be positive");
  }
  std::vector<std::vector<double>> out;
  out.reserve(steps + 1);
  std::vector<double> alignment(length, 0.0);
  alignment[0] = 1.0;
  out.push_back(alignment);
  for (std::size_t i = 0; i < steps; ++i) {
    const auto logits = prior_logits(filter, alignment);
    alignment = softmax<double>(logits);
    out.push_back(alignment);
  }
  return out;
}

}  // namespace locattn
