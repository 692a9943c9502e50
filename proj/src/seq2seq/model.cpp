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

#include "locattn/seq2seq/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "locattn/numerics/init.hpp"

namespace locattn {

void ModelConfig::validate() const {
  if (vocab_size == 0 || embed_dim == 0 || encoder_dim == 0 ||
      attention_rnn_dim == 0 || decoder_rnn_dim == 0 || feature_dim == 0) {
    throw std::invalid_argument("ModelConfig: zero-sized dimension");
  }
  if (encoder_dim % 2 != 0) {
    throw std::invalid_argument("ModelConfig: encoder_dim must be even");
  }
  if (frames_per_step == 0) {
    throw std::invalid_argument("ModelConfig: frames_per_step must be >= 1");
  }
  if (is_gmm(mechanism)) {
    gmm_config().variant.validate();
  } else {
    energy_config().validate();
  }
}

EnergyConfig ModelConfig::energy_config() const {
  EnergyConfig c = EnergyConfig::for_mechanism(mechanism);
  c.hidden = attention_hidden;
  c.generator_hidden = attention_hidden;
  if (mechanism == Mechanism::kLsa) {
    c.static_filters = lsa_filters;
    c.static_width = lsa_width;
  } else if (mechanism == Mechanism::kDca) {
    c.static_filters = dca_static_filters;
    c.static_width = dca_width;
    c.dynamic_filters = dca_dynamic_filters;
    c.dynamic_width = dca_width;
    c.prior = beta_binomial_taps(prior_alpha, prior_beta, prior_taps - 1);
  }
  return c;
}

GmmConfig ModelConfig::gmm_config() const {
  GmmConfig c;
  c.variant = GmmVariant::from_mechanism(mechanism);
  c.components = gmm_components;
  c.hidden = attention_hidden;
  c.delta_target = gmm_delta_target;
  c.sigma_target = gmm_sigma_target;
  return c;
}

// ---------------------------------------------------------------------------

template <typename Real>
Gru<Real>::Gru(std::size_t input_dim, std::size_t hidden_dim,
               ParameterSet<Real>& params, std::mt19937_64& rng,
               const std::string& prefix)
    : input_dim_(input_dim), hidden_dim_(hidden_dim) {
  wx_ = &params.add(prefix + "/Wx", {3 * hidden_dim, input_dim});
  wh_ = &params.add(prefix + "/Wh", {3 * hidden_dim, hidden_dim});
  bx_ = &params.add(prefix + "/bx", {3 * hidden_dim});
  bh_ = &params.add(prefix + "/bh", {3 * hidden_dim});
  init_fan_in(*wx_, hidden_dim, rng);
  init_fan_in(*wh_, hidden_dim, rng);
  init_fan_in(*bx_, hidden_dim, rng);
  init_fan_in(*bh_, hidden_dim, rng);
}

// z = sig(gx_z + gh_z), r = sig(gx_r + gh_r), n = tanh(gx_n + r * gh_n),
// h' = n + z * (h - n).
template <typename Real>
Var Gru<Real>::step(Tape<Real>& tape, Var input, Var hidden) const {
  if (tape.size(input) != input_dim_ || tape.size(hidden) != hidden_dim_) {
    throw std::invalid_argument("Gru: input or state dimension mismatch");
  }
  const std::size_t h = hidden_dim_;
  Var gx = tape.add(tape.matvec(tape.param(*wx_), input), tape.param(*bx_));
  Var gh = tape.add(tape.matvec(tape.param(*wh_), hidden), tape.param(*bh_));
  Var z = tape.sigmoid(tape.add(tape.slice(gx, 0, h), tape.slice(gh, 0, h)));
  Var r = tape.sigmoid(tape.add(tape.slice(gx, h, h), tape.slice(gh, h, h)));
  Var n = tape.tanh(
      tape.add(tape.slice(gx, 2 * h, h), tape.mul(r, tape.slice(gh, 2 * h, h))));
  return tape.add(n, tape.mul(z, tape.sub(hidden, n)));
}

// ---------------------------------------------------------------------------

template <typename Real>
Model<Real>::Model(ModelConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const ModelConfig& c = config_;
  embedding_ = &params_.add("encoder/embedding", {c.vocab_size, c.embed_dim});
  init_uniform(*embedding_, 1.0, rng);
  const std::size_t half = c.encoder_dim / 2;
  encoder_fwd_ =
      std::make_unique<Gru<Real>>(c.embed_dim, half, params_, rng, "encoder/fwd");
  encoder_bwd_ =
      std::make_unique<Gru<Real>>(c.embed_dim, half, params_, rng, "encoder/bwd");
  attention_rnn_ = std::make_unique<Gru<Real>>(
      c.output_dim() + c.encoder_dim, c.attention_rnn_dim, params_, rng,
      "attention_rnn");
  if (is_gmm(c.mechanism)) {
    attention_ = std::make_unique<GmmAttention<Real>>(
        c.gmm_config(), c.attention_rnn_dim, params_, rng);
  } else {
    attention_ = std::make_unique<EnergyAttention<Real>>(
        c.energy_config(), c.attention_rnn_dim, c.encoder_dim, params_, rng);
  }
  decoder_rnn_ = std::make_unique<Gru<Real>>(
      c.encoder_dim + c.attention_rnn_dim, c.decoder_rnn_dim, params_, rng,
      "decoder_rnn");
  out_w_ = &params_.add("output/W", {c.output_dim(), c.decoder_rnn_dim});
  out_b_ = &params_.add("output/b", {c.output_dim()});
  init_fan_in(*out_w_, c.decoder_rnn_dim, rng);
}

template <typename Real>
Var Model<Real>::encode(Tape<Real>& tape, std::span<const int> symbols) {
  if (symbols.empty()) {
    throw std::invalid_argument("encode: empty input sequence");
  }
  const std::size_t len = symbols.size();
  const std::size_t emb = config_.embed_dim;
  Var table = tape.param(*embedding_);
  std::vector<Var> embedded;
  embedded.reserve(len);
  for (int s : symbols) {
    if (s < 0 || static_cast<std::size_t>(s) >= config_.vocab_size) {
      throw std::invalid_argument("encode: unknown symbol " + std::to_string(s));
    }
    embedded.push_back(tape.slice(table, static_cast<std::size_t>(s) * emb, emb));
  }
  const std::size_t half = config_.encoder_dim / 2;
  std::vector<Var> fwd(len);
  std::vector<Var> bwd(len);
  Var h = tape.zeros(half);
  for (std::size_t j = 0; j < len; ++j) {
    h = encoder_fwd_->step(tape, embedded[j], h);
    fwd[j] = h;
  }
  h = tape.zeros(half);
  for (std::size_t j = len; j-- > 0;) {
    h = encoder_bwd_->step(tape, embedded[j], h);
    bwd[j] = h;
  }
  std::vector<Var> rows;
  rows.reserve(2 * len);
  for (std::size_t j = 0; j < len; ++j) {
    rows.push_back(fwd[j]);
    rows.push_back(bwd[j]);
  }
  return tape.reshape(tape.concat(rows), len, config_.encoder_dim);
}

template <typename Real>
AttentionMemory Model<Real>::prepare(Tape<Real>& tape, Var encoder_outputs) {
  return attention_->prepare(tape, encoder_outputs);
}

template <typename Real>
DecoderState Model<Real>::start(Tape<Real>& tape, const AttentionMemory& memory) {
  DecoderState s;
  s.attention_rnn = tape.zeros(config_.attention_rnn_dim);
  s.decoder_rnn = tape.zeros(config_.decoder_rnn_dim);
  s.carry = attention_->initial(tape, memory);
  s.context = tape.matvec_t(memory.values, s.carry.alignment);
  return s;
}

template <typename Real>
DecoderStep Model<Real>::decode_step(Tape<Real>& tape,
                                     const AttentionMemory& memory,
                                     const DecoderState& state,
                                     Var prev_output) {
  if (tape.size(prev_output) != config_.output_dim() ||
      tape.size(state.attention_rnn) != config_.attention_rnn_dim ||
      tape.size(state.decoder_rnn) != config_.decoder_rnn_dim ||
      tape.size(state.context) != config_.encoder_dim) {
    throw std::invalid_argument("decode_step: state does not match the model");
  }
  const Var att_in[] = {prev_output, state.context};
  Var s = attention_rnn_->step(tape, tape.concat(att_in), state.attention_rnn);
  AttentionStep a = attention_->attend(tape, s, memory, state.carry);
  Var c = tape.matvec_t(memory.values, a.weights);
  const Var dec_in[] = {c, s};
  Var d = decoder_rnn_->step(tape, tape.concat(dec_in), state.decoder_rnn);
  Var y = tape.add(tape.matvec(tape.param(*out_w_), d), tape.param(*out_b_));
  return {a.weights, c, y, {s, d, c, a.carry}};
}

template <typename Real>
Var Model<Real>::teacher_forced_loss(Tape<Real>& tape, const Example& ex,
                                     AlignmentTrace* trace) {
  if (ex.frames.frames.empty()) {
    throw std::invalid_argument("teacher_forced_loss: example has no frames");
  }
  const std::size_t r = config_.frames_per_step;
  const std::size_t dim = config_.feature_dim;
  if (ex.frames.dim() != dim) {
    throw std::invalid_argument("teacher_forced_loss: feature_dim mismatch");
  }
  Var h = encode(tape, ex.symbols);
  AttentionMemory memory = prepare(tape, h);
  DecoderState state = start(tape, memory);
  const std::size_t total = ex.frames.size();
  const std::size_t steps = ex.decoder_steps(r);

  std::vector<Real> prev(config_.output_dim(), Real(0));
  std::vector<Real> target;
  std::vector<Var> losses;
  losses.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    Var prev_var = tape.constant(prev, prev.size());
    DecoderStep st = decode_step(tape, memory, state, prev_var);
    const std::size_t first = i * r;
    const std::size_t count = std::min(r, total - first);
    target.clear();
    std::fill(prev.begin(), prev.end(), Real(0));
    for (std::size_t f = 0; f < count; ++f) {
      const Frame& frame = ex.frames.frames[first + f];
      for (std::size_t d = 0; d < dim; ++d) {
        target.push_back(static_cast<Real>(frame[d]));
        prev[f * dim + d] = static_cast<Real>(frame[d]);
      }
    }
    Var predicted = tape.slice(st.output, 0, count * dim);
    losses.push_back(tape.sum_squares(
        tape.sub(predicted, tape.constant(target, target.size()))));
    if (trace) {
      auto w = tape.value(st.weights);
      std::vector<double> alpha(w.begin(), w.end());
      trace->push(alpha);
    }
    state = st.state;
  }
  return tape.sum(tape.concat(losses));
}

template <typename Real>
Generation Model<Real>::generate(std::span<const int> symbols,
                                 std::size_t max_steps, std::size_t tail_steps) {
  if (max_steps == 0) {
    throw std::invalid_argument("generate: max_steps must be positive");
  }
  Tape<Real> tape;
  Var h = encode(tape, symbols);
  AttentionMemory memory = prepare(tape, h);
  DecoderState state = start(tape, memory);
  const std::size_t len = memory.length;
  const std::size_t r = config_.frames_per_step;
  const std::size_t dim = config_.feature_dim;
  const auto base = tape.mark();

  auto copy = [&tape](Var v) {
    auto s = tape.value(v);
    return std::vector<Real>(s.begin(), s.end());
  };

  Generation gen;
  std::vector<Real> prev(config_.output_dim(), Real(0));
  std::size_t at_end = 0;
  for (std::size_t i = 0; i < max_steps; ++i) {
    DecoderStep st = decode_step(tape, memory, state, tape.constant(prev, prev.size()));
    const auto alpha = copy(st.weights);
    gen.trace.push(std::vector<double>(alpha.begin(), alpha.end()));
    prev = copy(st.output);
    for (std::size_t f = 0; f < r; ++f) {
      gen.frames.frames.emplace_back(prev.begin() + f * dim,
                                     prev.begin() + (f + 1) * dim);
    }
    const auto s = copy(st.state.attention_rnn);
    const auto d = copy(st.state.decoder_rnn);
    const auto c = copy(st.state.context);
    const auto means = st.state.carry.means.valid()
                           ? copy(st.state.carry.means)
                           : std::vector<Real>{};
    tape.rewind(base);
    state.attention_rnn = tape.constant(s, s.size());
    state.decoder_rnn = tape.constant(d, d.size());
    state.context = tape.constant(c, c.size());
    state.carry.alignment = tape.constant(alpha, alpha.size());
    state.carry.means =
        means.empty() ? Var{} : tape.constant(means, means.size());

    at_end = gen.trace.peaks.back() + 1 == len ? at_end + 1 : 0;
    if (at_end >= tail_steps) {
      return gen;
    }
  }
  gen.trace.hit_max_steps = true;
  return gen;
}

template class Gru<float>;
template class Gru<double>;
template class Model<float>;
template class Model<double>;

}  // namespace locattn
