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

#include "locattn/attention/energy_attention.hpp"

#include <stdexcept>
#include <vector>

#include "locattn/numerics/init.hpp"

namespace locattn {

EnergyConfig EnergyConfig::cba() {
  EnergyConfig c;
  c.terms = EnergyTermConfig::cba();
  return c;
}

EnergyConfig EnergyConfig::lsa() {
  EnergyConfig c;
  c.terms = EnergyTermConfig::lsa();
  c.static_filters = 32;
  c.static_width = 31;
  return c;
}

EnergyConfig EnergyConfig::dca() {
  EnergyConfig c;
  c.terms = EnergyTermConfig::dca();
  c.static_filters = 8;
  c.static_width = 21;
  c.dynamic_filters = 8;
  c.dynamic_width = 21;
  c.prior = default_prior_filter();
  return c;
}

EnergyConfig EnergyConfig::for_mechanism(Mechanism m) {
  switch (m) {
    case Mechanism::kCba:
      return cba();
    case Mechanism::kLsa:
      return lsa();
    case Mechanism::kDca:
      return dca();
    default:
      throw std::invalid_argument("not an energy-based mechanism: " +
                                  std::string(mechanism_name(m)));
  }
}

void EnergyConfig::validate() const {
  if (hidden == 0) {
    throw std::invalid_argument("EnergyConfig: hidden width must be positive");
  }
  if (terms.use_static &&
      (static_filters == 0 || static_width % 2 == 0)) {
    throw std::invalid_argument(
        "EnergyConfig: static filters need a positive count and odd width");
  }
  if (terms.use_dynamic &&
      (dynamic_filters == 0 || dynamic_width % 2 == 0 ||
       generator_hidden == 0)) {
    throw std::invalid_argument(
        "EnergyConfig: dynamic filters need a positive count and odd width");
  }
  if (terms.use_prior && (!prior || prior->taps.empty())) {
    throw std::invalid_argument("EnergyConfig: use_prior set but no prior filter");
  }
}

template <typename Real>
EnergyAttention<Real>::EnergyAttention(EnergyConfig config,
                                       std::size_t query_dim,
                                       std::size_t value_dim,
                                       ParameterSet<Real>& params,
                                       std::mt19937_64& rng,
                                       const std::string& prefix)
    : config_(std::move(config)), query_dim_(query_dim), value_dim_(value_dim) {
  config_.validate();
  const EnergyTermConfig& t = config_.terms;
  const std::size_t h = config_.hidden;
  if (t.use_query) {
    w_ = &params.add(prefix + "/W", {h, query_dim});
    init_fan_in(*w_, query_dim, rng);
  }
  if (t.use_key) {
    v_ = &params.add(prefix + "/V", {h, value_dim});
    init_fan_in(*v_, value_dim, rng);
  }
  if (t.use_static) {
    filters_ = &params.add(prefix + "/F",
                           {config_.static_filters, config_.static_width});
    init_fan_in(*filters_, config_.static_width, rng);
    u_ = &params.add(prefix + "/U", {h, config_.static_filters});
    init_fan_in(*u_, config_.static_filters, rng);
  }
  if (t.use_dynamic) {
    const std::size_t gh = config_.generator_hidden;
    gen_w_ = &params.add(prefix + "/W_G", {gh, query_dim});
    gen_b_ = &params.add(prefix + "/b_G", {gh});
    gen_v_ = &params.add(prefix + "/V_G",
                         {config_.dynamic_filters * config_.dynamic_width, gh});
    init_fan_in(*gen_w_, query_dim, rng);
    init_fan_in(*gen_v_, gh, rng);
    t_ = &params.add(prefix + "/T", {h, config_.dynamic_filters});
    init_fan_in(*t_, config_.dynamic_filters, rng);
  }
  b_ = &params.add(prefix + "/b", {h});
  energy_ = &params.add(prefix + "/v", {1, h});
  init_fan_in(*energy_, h, rng);
  if (t.use_prior) {
    prior_taps_.assign(config_.prior->taps.begin(), config_.prior->taps.end());
  }
}

template <typename Real>
Var EnergyAttention<Real>::static_features(Tape<Real>& tape, Var alignment) {
  if (!filters_) {
    throw std::logic_error("EnergyAttention: static term disabled");
  }
  return tape.conv_bank(alignment, tape.param(*filters_), ConvMode::kCentered);
}

template <typename Real>
Var EnergyAttention<Real>::dynamic_filters(Tape<Real>& tape, Var query) {
  if (!gen_w_) {
    throw std::logic_error("EnergyAttention: dynamic term disabled");
  }
  if (tape.size(query) != query_dim_) {
    throw std::invalid_argument("EnergyAttention: query dimension mismatch");
  }
  Var hidden = tape.tanh(
      tape.add(tape.matvec(tape.param(*gen_w_), query), tape.param(*gen_b_)));
  return tape.reshape(tape.matvec(tape.param(*gen_v_), hidden),
                      config_.dynamic_filters, config_.dynamic_width);
}

template <typename Real>
Var EnergyAttention<Real>::dynamic_features(Tape<Real>& tape, Var query,
                                            Var alignment) {
  return tape.conv_bank(alignment, dynamic_filters(tape, query),
                        ConvMode::kCentered);
}

template <typename Real>
Var EnergyAttention<Real>::prior_logits(Tape<Real>& tape, Var alignment) {
  if (prior_taps_.empty()) {
    throw std::invalid_argument("EnergyAttention: prior term requires a prior filter");
  }
  Var taps = tape.constant(prior_taps_, prior_taps_.size());
  return tape.log_floor(tape.conv1d(alignment, taps, ConvMode::kCausal),
                        static_cast<Real>(kPriorLogitFloor));
}

template <typename Real>
Var EnergyAttention<Real>::energies(Tape<Real>& tape, Var query,
                                    const AttentionMemory& memory,
                                    const AttentionCarry& carry) {
  const EnergyTermConfig& t = config_.terms;
  const std::size_t h = config_.hidden;
  const std::size_t len = memory.length;
  if (tape.size(carry.alignment) != len) {
    throw std::invalid_argument("EnergyAttention: alignment length mismatch");
  }

  // Per-position terms, [L x h].
  Var positional = t.use_key ? memory.keys : tape.zeros(len, h);
  if (t.use_static) {
    positional = tape.add(
        positional,
        tape.rows_matvec(tape.param(*u_), static_features(tape, carry.alignment)));
  }
  if (t.use_dynamic) {
    positional = tape.add(
        positional, tape.rows_matvec(tape.param(*t_),
                                     dynamic_features(tape, query, carry.alignment)));
  }
  // Shared across positions, [h].
  Var shared = tape.param(*b_);
  if (t.use_query) {
    if (tape.size(query) != query_dim_) {
      throw std::invalid_argument("EnergyAttention: query dimension mismatch");
    }
    shared = tape.add(tape.matvec(tape.param(*w_), query), shared);
  }
  Var hidden = tape.tanh(tape.add_rows(positional, shared));
  Var e = tape.reshape(tape.rows_matvec(tape.param(*energy_), hidden), len, 1);
  if (t.use_prior) {
    e = tape.add(e, prior_logits(tape, carry.alignment));
  }
  return e;
}

template <typename Real>
AttentionMemory EnergyAttention<Real>::prepare(Tape<Real>& tape,
                                               Var encoder_outputs) {
  if (tape.cols(encoder_outputs) != value_dim_) {
    throw std::invalid_argument("EnergyAttention: encoder dimension mismatch");
  }
  AttentionMemory m{encoder_outputs, Var{}, tape.rows(encoder_outputs)};
  if (config_.terms.use_key) {
    m.keys = tape.rows_matvec(tape.param(*v_), encoder_outputs);
  }
  return m;
}

template <typename Real>
AttentionCarry EnergyAttention<Real>::initial(Tape<Real>& tape,
                                              const AttentionMemory& memory) {
  std::vector<Real> one_hot(memory.length, Real(0));
  one_hot[0] = Real(1);
  return {tape.constant(one_hot, memory.length), Var{}};
}

template <typename Real>
AttentionStep EnergyAttention<Real>::attend(Tape<Real>& tape, Var query,
                                            const AttentionMemory& memory,
                                            const AttentionCarry& carry) {
  Var weights = tape.softmax(energies(tape, query, memory, carry));
  return {weights, {weights, Var{}}};
}

template class EnergyAttention<float>;
template class EnergyAttention<double>;

}  // namespace locattn
