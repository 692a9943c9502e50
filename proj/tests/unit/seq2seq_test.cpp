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

#include "locattn/seq2seq/model.hpp"
#include "locattn/seq2seq/task.hpp"
#include "locattn/seq2seq/trainer.hpp"

namespace locattn {
namespace {

ModelConfig small_model(Mechanism m) {
  ModelConfig c;
  c.mechanism = m;
  c.embed_dim = 6;
  c.encoder_dim = 8;
  c.attention_rnn_dim = 8;
  c.decoder_rnn_dim = 8;
  c.attention_hidden = 8;
  c.gmm_components = 2;
  c.lsa_filters = 3;
  c.lsa_width = 5;
  c.dca_static_filters = 2;
  c.dca_dynamic_filters = 2;
  c.dca_width = 5;
  return c;
}

TEST(SyntheticTask, FramesFollowTheSymbols) {
  SyntheticTask task(TaskConfig{});
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const Example ex = task.sample(rng);
    EXPECT_GE(ex.symbols.size(), 8u);
    EXPECT_LE(ex.symbols.size(), 16u);
    ASSERT_EQ(ex.frames.size(), ex.frame_positions.size());
    EXPECT_EQ(ex.frame_positions.front(), 0u);
    EXPECT_EQ(ex.frame_positions.back(), ex.symbols.size() - 1);
    std::vector<std::size_t> runs(ex.symbols.size(), 0);
    for (std::size_t i = 0; i < ex.frames.size(); ++i) {
      if (i) EXPECT_LE(ex.frame_positions[i - 1], ex.frame_positions[i]);
      ++runs[ex.frame_positions[i]];
    }
    for (std::size_t n : runs) {
      EXPECT_GE(n, 2u);
      EXPECT_LE(n, 4u);
    }
  }
}

TEST(SyntheticTask, StepPositionsUseTheFirstFrameOfEachStep) {
  SyntheticTask task(TaskConfig{});
  std::mt19937_64 rng(2);
  const Example ex = task.sample(5, rng);
  const auto pos = ex.step_positions(2);
  ASSERT_EQ(pos.size(), ex.decoder_steps(2));
  for (std::size_t i = 0; i < pos.size(); ++i) EXPECT_EQ(pos[i], ex.frame_positions[2 * i]);
}

TEST(SyntheticTask, HeldOutSetIsReproducible) {
  SyntheticTask task(TaskConfig{});
  const auto a = task.sample_set(4, 99);
  const auto b = task.sample_set(4, 99);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a[i].symbols, b[i].symbols);
    EXPECT_EQ(a[i].frames.frames, b[i].frames.frames);
  }
}

TEST(SyntheticTask, PausesEmitNearSilence) {
  TaskConfig c;
  c.pause_probability = 0.5;
  SyntheticTask task(c);
  std::mt19937_64 rng(3);
  const Example ex = task.sample(12, rng);
  const int pause = static_cast<int>(c.vocab_size) - 1;
  EXPECT_NE(ex.symbols.front(), pause);
  EXPECT_NE(ex.symbols.back(), pause);
  for (std::size_t i = 0; i < ex.frames.size(); ++i) {
    if (ex.symbols[ex.frame_positions[i]] != pause) continue;
    for (double v : ex.frames.frames[i]) EXPECT_LT(std::fabs(v), 0.1);
  }
}

TEST(SyntheticTask, RejectsBadConfig) {
  TaskConfig c;
  c.min_length = 5;
  c.max_length = 4;
  EXPECT_THROW(SyntheticTask{c}, std::invalid_argument);
}

TEST(Model, RejectsUnknownSymbols) {
  Model<double> model(small_model(Mechanism::kDca), 0);
  Tape<double> tape;
  const std::vector<int> bad = {0, 42};
  EXPECT_THROW(model.encode(tape, bad), std::invalid_argument);
  EXPECT_THROW(model.encode(tape, std::vector<int>{}), std::invalid_argument);
}

TEST(Model, GenerationIsBoundedAndRecordsAlignments) {
  for (Mechanism m : kAllMechanisms) {
    Model<double> model(small_model(m), 1);
    const std::vector<int> symbols = {1, 2, 3, 4};
    const Generation g = model.generate(symbols, 12);
    EXPECT_LE(g.trace.steps(), 12u);
    EXPECT_EQ(g.frames.size(), 2 * g.trace.steps());
    EXPECT_EQ(g.trace.length, 4u);
    for (const auto& w : g.trace.weights) EXPECT_EQ(w.size(), 4u);
  }
}

TEST(Model, SameSeedSameParameters) {
  Model<double> a(small_model(Mechanism::kLsa), 5);
  Model<double> b(small_model(Mechanism::kLsa), 5);
  auto ia = a.params().begin();
  for (const auto& p : b.params()) {
    EXPECT_EQ(p.name, ia->name);
    EXPECT_EQ(p.value.values(), ia->value.values());
    ++ia;
  }
}

TEST(Trainer, LearningRateDropsHalfway) {
  TrainConfig c;
  c.steps = 100;
  EXPECT_DOUBLE_EQ(learning_rate_at(c, 49), 1e-3);
  EXPECT_DOUBLE_EQ(learning_rate_at(c, 50), 5e-4);
}

TEST(Trainer, LossDecreasesAndRunsAreDeterministic) {
  TaskConfig tc;
  tc.min_length = 3;
  tc.max_length = 5;
  SyntheticTask task(tc);
  TrainConfig cfg;
  cfg.steps = 30;
  cfg.batch_size = 4;
  cfg.eval_interval = 15;
  cfg.eval_samples = 2;
  cfg.learning_rate = 1e-2;
  cfg.lr_after_drop = 1e-2;
  std::vector<double> first;
  for (int rep = 0; rep < 2; ++rep) {
    Model<double> model(small_model(Mechanism::kGmmV2b), 3);
    const TrainResult r = train(model, task, cfg);
    EXPECT_FALSE(r.diverged);
    EXPECT_EQ(r.steps_completed, 30u);
    EXPECT_EQ(model.trained_steps(), 30u);
    ASSERT_EQ(r.evals.size(), 3u);  // steps 0, 15, 30
    EXPECT_LT(r.losses.back(), r.losses.front());
    if (rep == 0) {
      first = r.losses;
    } else {
      EXPECT_EQ(first, r.losses);
    }
  }
}

TEST(Trainer, NonFiniteLossIsReportedAsDivergence) {
  SyntheticTask task(TaskConfig{});
  TrainConfig cfg;
  cfg.steps = 5;
  cfg.batch_size = 1;
  cfg.eval_interval = 0;
  cfg.learning_rate = std::nan("");
  Model<double> model(small_model(Mechanism::kCba), 0);
  const TrainResult r = train(model, task, cfg);
  EXPECT_TRUE(r.diverged);
  EXPECT_FALSE(r.failure.empty());
  EXPECT_LT(r.steps_completed, 5u);
}

TEST(Trainer, SuccessRule) {
  EvalRecord r;
  r.coverage = 0.95;
  r.violations = 1.0;
  r.tracking = 0.95;
  EXPECT_TRUE(is_success(r));
  r.tracking = 0.5;
  EXPECT_FALSE(is_success(r));
  r.tracking = 0.95;
  r.violations = 3.0;
  EXPECT_FALSE(is_success(r));
  r.violations = 0.0;
  r.coverage = 0.9;
  EXPECT_FALSE(is_success(r));
}

}  // namespace
}  // namespace locattn
