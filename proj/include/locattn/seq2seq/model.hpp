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
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "locattn/attention/attention.hpp"
#include "locattn/attention/energy_attention.hpp"
#include "locattn/attention/gmm_attention.hpp"
#include "locattn/metrics/metrics.hpp"
#include "locattn/seq2seq/task.hpp"

namespace locattn {

struct ModelConfig {
  std::size_t vocab_size = 8;
  std::size_t embed_dim = 16;
  std::size_t encoder_dim = 32;  // bidirectional, encoder_dim / 2 per direction
  std::size_t attention_rnn_dim = 32;
  std::size_t decoder_rnn_dim = 32;
  std::size_t feature_dim = 8;
  std::size_t frames_per_step = 2;
  Mechanism mechanism = Mechanism::kDca;

  // Attention hyperparameters.
  std::size_t attention_hidden = 128;
  std::size_t gmm_components = 5;
  double gmm_delta_target = 1.0;
  double gmm_sigma_target = 10.0;
  std::size_t lsa_filters = 32;
  std::size_t lsa_width = 31;
  std::size_t dca_static_filters = 8;
  std::size_t dca_dynamic_filters = 8;
  std::size_t dca_width = 21;
  double prior_alpha = 0.1;
  double prior_beta = 0.9;
  int prior_taps = 11;

  std::size_t output_dim() const { return frames_per_step * feature_dim; }
  // Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  EnergyConfig energy_config() const;
  GmmConfig gmm_config() const;
};

template <typename Real>
class Gru {
 public:
  Gru(std::size_t input_dim, std::size_t hidden_dim, ParameterSet<Real>& params,
      std::mt19937_64& rng, const std::string& prefix);
  Var step(Tape<Real>& tape, Var input, Var hidden) const;
  std::size_t hidden_dim() const { return hidden_dim_; }

 private:
  std::size_t input_dim_;
  std::size_t hidden_dim_;
  Parameter<Real>* wx_;
  Parameter<Real>* wh_;
  Parameter<Real>* bx_;
  Parameter<Real>* bh_;
};

struct DecoderState {
  Var attention_rnn;  // s_{i-1}
  Var decoder_rnn;    // d_{i-1}
  Var context;        // c_{i-1}
  AttentionCarry carry;
};

struct DecoderStep {
  Var weights;  // alpha_i
  Var context;  // c_i
  Var output;   // y_i, frames_per_step * feature_dim
  DecoderState state;
};

struct Generation {
  FeatureSequence frames;
  AlignmentTrace trace;
};

// Encoder (embedding + bidirectional GRU), attention RNN, attention,
// decoder RNN and a linear output head.
template <typename Real>
class Model {
 public:
  Model(ModelConfig config, std::uint64_t seed);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterSet<Real>& params() { return params_; }
  const ParameterSet<Real>& params() const { return params_; }
  Attention<Real>& attention() { return *attention_; }

  std::uint64_t trained_steps() const { return trained_steps_; }
  void set_trained_steps(std::uint64_t n) { trained_steps_ = n; }

  // H = [L x encoder_dim]. Throws on empty input or unknown symbols.
  Var encode(Tape<Real>& tape, std::span<const int> symbols);
  AttentionMemory prepare(Tape<Real>& tape, Var encoder_outputs);
  // Zero RNN states, alpha_0 one-hot at 0, c_0 = H^T alpha_0.
  DecoderState start(Tape<Real>& tape, const AttentionMemory& memory);
  DecoderStep decode_step(Tape<Real>& tape, const AttentionMemory& memory,
                          const DecoderState& state, Var prev_output);

  // Teacher-forced sum of squared errors over all real frames of `ex`.
  // When `trace` is given the per-step alignments are appended to it.
  Var teacher_forced_loss(Tape<Real>& tape, const Example& ex,
                          AlignmentTrace* trace = nullptr);

  // Free-running decoding. Stops once the alignment peak has stayed on the
  // last encoder position for `tail_steps` steps, or after max_steps.
  Generation generate(std::span<const int> symbols, std::size_t max_steps,
                      std::size_t tail_steps = 2);

 private:
  ModelConfig config_;
  ParameterSet<Real> params_;
  Parameter<Real>* embedding_ = nullptr;
  std::unique_ptr<Gru<Real>> encoder_fwd_;
  std::unique_ptr<Gru<Real>> encoder_bwd_;
  std::unique_ptr<Gru<Real>> attention_rnn_;
  std::unique_ptr<Gru<Real>> decoder_rnn_;
  std::unique_ptr<Attention<Real>> attention_;
  Parameter<Real>* out_w_ = nullptr;
  Parameter<Real>* out_b_ = nullptr;
  std::uint64_t trained_steps_ = 0;
};

extern template class Gru<float>;
extern template class Gru<double>;
extern template class Model<float>;
extern template class Model<double>;

}  // namespace locattn
