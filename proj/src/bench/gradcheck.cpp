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

#include "locattn/bench/gradcheck.hpp"

#include <random>

#include "locattn/seq2seq/task.hpp"

namespace locattn {

ModelConfig tiny_model_config(Mechanism mechanism) {
  ModelConfig c;
  c.mechanism = mechanism;
  c.vocab_size = 4;
  c.embed_dim = 3;
  c.encoder_dim = 4;
  c.attention_rnn_dim = 3;
  c.decoder_rnn_dim = 3;
  c.feature_dim = 2;
  c.frames_per_step = 2;
  c.attention_hidden = 4;
  c.gmm_components = 2;
  c.lsa_filters = 2;
  c.lsa_width = 3;
  c.dca_static_filters = 2;
  c.dca_dynamic_filters = 2;
  c.dca_width = 3;
  c.prior_taps = 4;
  return c;
}

GradCheckResult check_model_gradients(Mechanism mechanism, std::uint64_t seed,
                                      std::size_t max_coords_per_param) {
  const ModelConfig config = tiny_model_config(mechanism);
  Model<double> model(config, seed);
  TaskConfig tc;
  tc.vocab_size = config.vocab_size;
  tc.feature_dim = config.feature_dim;
  tc.min_length = 4;
  tc.max_length = 4;
  tc.seed = seed + 1;
  SyntheticTask task(tc);
  std::mt19937_64 rng(seed + 2);
  const Example ex = task.sample(rng);
  return grad_check_parameters(
      model.params(),
      [&](Tape<double>& tape) { return model.teacher_forced_loss(tape, ex); },
      kGradCheckStep, max_coords_per_param, seed);
}

}  // namespace locattn
