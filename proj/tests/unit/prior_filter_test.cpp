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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "locattn/attention/prior_filter.hpp"

namespace locattn {
namespace {

// Exact rational evaluation of C(n,k) (a)_k (b)_{n-k} / (a+b)_n.
constexpr double kDefaultTaps[] = {
    0.74002289694145312,  0.07474978756984375,  0.041574320052890625,
    0.029470404088125,    0.02317057133015625,  0.0193219001600625,
    0.01675879095515625,  0.014978553088125,    0.013751861240390625,
    0.01302807906984375,  0.013172835503953125};

TEST(BetaBinomial, DefaultTapsMatchExactRationals) {
  const PriorFilter f = default_prior_filter();
  ASSERT_EQ(f.taps.size(), 11u);
  for (std::size_t k = 0; k < 11; ++k) EXPECT_NEAR(f.taps[k], kDefaultTaps[k], 1e-14);
  EXPECT_DOUBLE_EQ(f.alpha, 0.1);
  EXPECT_DOUBLE_EQ(f.beta, 0.9);
  EXPECT_EQ(f.n, 10);
}

TEST(BetaBinomial, IntegerParametersMatchExactRationals) {
  const PriorFilter f = beta_binomial_taps(2.0, 3.0, 4);
  const double want[] = {3.0 / 14.0, 2.0 / 7.0, 9.0 / 35.0, 6.0 / 35.0, 1.0 / 14.0};
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(f.taps[k], want[k], 1e-15);
}

TEST(BetaBinomial, SumsToOneWithAnalyticMean) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int t = 0; t < 100; ++t) {
    const double a = u(rng), b = u(rng);
    const int n = static_cast<int>(rng() % 30);
    const PriorFilter f = beta_binomial_taps(a, b, n);
    double sum = 0.0;
    for (double p : f.taps) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(f.mean(), n * a / (a + b), 1e-9);
  }
}

TEST(BetaBinomial, RejectsInvalidParameters) {
  EXPECT_THROW(beta_binomial_taps(0.0, 0.9, 10), std::invalid_argument);
  EXPECT_THROW(beta_binomial_taps(0.1, -1.0, 10), std::invalid_argument);
  EXPECT_THROW(beta_binomial_taps(0.1, 0.9, -1), std::invalid_argument);
  EXPECT_THROW(beta_binomial_taps(std::nan(""), 0.9, 10), std::invalid_argument);
}

TEST(BetaBinomial, ZeroTrialsIsADelta) {
  const PriorFilter f = beta_binomial_taps(0.3, 0.4, 0);
  ASSERT_EQ(f.taps.size(), 1u);
  EXPECT_DOUBLE_EQ(f.taps[0], 1.0);
}

TEST(PriorLogits, FloorOutsideTheCausalReach) {
  const PriorFilter f = beta_binomial_taps(0.1, 0.9, 2);
  std::vector<double> prev(8, 0.0);
  prev[3] = 1.0;
  const auto logits = prior_logits(f, prev);
  for (std::size_t j = 0; j < 8; ++j) {
    if (j >= 3 && j <= 5) {
      EXPECT_NEAR(logits[j], std::log(f.taps[j - 3]), 1e-12);
    } else {
      EXPECT_EQ(logits[j], kPriorLogitFloor);
    }
  }
}

TEST(PriorRollout, MeanAdvancesOneStepAndSpreadGrows) {
  const auto snaps = prior_rollout(default_prior_filter(), 40, 150);
  ASSERT_EQ(snaps.size(), 41u);
  double prev_std = -1.0;
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    const AlignmentMoments m = alignment_moments(snaps[i]);
    EXPECT_NEAR(m.mean, static_cast<double>(i), 1e-6);
    EXPECT_GE(m.stddev, prev_std);
    prev_std = m.stddev;
    double sum = 0.0;
    for (double w : snaps[i]) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(PriorRollout, StartsOneHotAtZero) {
  const auto snaps = prior_rollout(default_prior_filter(), 1, 5);
  EXPECT_DOUBLE_EQ(snaps[0][0], 1.0);
  EXPECT_THROW(prior_rollout(default_prior_filter(), 1, 0), std::invalid_argument);
}

}  // namespace
}  // namespace locattn
