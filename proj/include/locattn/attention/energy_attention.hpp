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
#include <optional>
#include <random>
#include <string>

#include "locattn/attention/attention.hpp"
#include "locattn/attention/prior_filter.hpp"

namespace locattn {

// Which terms of e_ij = v^T tanh(W s_i + V h_j + U f_ij + T g_ij + b) + p_ij
// are present.
struct EnergyTermConfig {
  bool use_query = false;    // W s_i
  bool use_key = false;      // V h_j
  bool use_static = false;   // U f_ij, learned filters over alpha_{i-1}
  bool use_dynamic = false;  // T g_ij, filters generated from s_i
  bool use_prior = false;    // p_ij, log of the causal prior filter

  static EnergyTermConfig cba() { return {true, true, false, false, false}; }
  static EnergyTermConfig lsa() { return {true, true, true, false, false}; }
  static EnergyTermConfig dca() { return {false, false, true, true, true}; }

  friend bool operator==(const EnergyTermConfig&,
                         const EnergyTermConfig&) = default;
};

struct EnergyConfig {
  EnergyTermConfig terms;
  std::size_t hidden = 128;
  std::size_t static_filters = 0;
  std::size_t static_width = 1;
  std::size_t dynamic_filters = 0;
  std::size_t dynamic_width = 1;
  std::size_t generator_hidden = 128;
  std::optional<PriorFilter> prior;

  // CBA; LSA with 32 static filters of width 31; DCA with 8 static and 8
  // dynamic filters of width 21 plus the default beta-binomial prior.
  static EnergyConfig cba();
  static EnergyConfig lsa();
  static EnergyConfig dca();
  static EnergyConfig for_mechanism(Mechanism m);

  // Throws std::invalid_argument on inconsistent settings, including
  // use_prior without a prior filter.
  void validate() const;
};

template <typename Real>
class EnergyAttention final : public Attention<Real> {
 public:
  EnergyAttention(EnergyConfig config, std::size_t query_dim,
                  std::size_t value_dim, ParameterSet<Real>& params,
                  std::mt19937_64& rng,
                  const std::string& prefix = "attention/energy");

  const EnergyConfig& config() const { return config_; }

  // f_i = F * alpha_{i-1}, [L x static_filters].
  Var static_features(Tape<Real>& tape, Var alignment);
  // G(s_i) = V_G tanh(W_G s_i + b_G), [dynamic_filters x dynamic_width].
  Var dynamic_filters(Tape<Real>& tape, Var query);
  // g_i = G(s_i) * alpha_{i-1}, [L x dynamic_filters].
  Var dynamic_features(Tape<Real>& tape, Var query, Var alignment);
  // p_i = max(log(P * alpha_{i-1}), -1e6), causal.
  Var prior_logits(Tape<Real>& tape, Var alignment);
  Var energies(Tape<Real>& tape, Var query, const AttentionMemory& memory,
               const AttentionCarry& carry);

  AttentionMemory prepare(Tape<Real>& tape, Var encoder_outputs) override;
  AttentionCarry initial(Tape<Real>& tape,
                         const AttentionMemory& memory) override;
  AttentionStep attend(Tape<Real>& tape, Var query,
                       const AttentionMemory& memory,
                       const AttentionCarry& carry) override;

 private:
  EnergyConfig config_;
  std::size_t query_dim_;
  std::size_t value_dim_;
  Parameter<Real>* w_ = nullptr;      // query projection
  Parameter<Real>* v_ = nullptr;      // key projection
  Parameter<Real>* u_ = nullptr;      // static feature projection
  Parameter<Real>* t_ = nullptr;      // dynamic feature projection
  Parameter<Real>* b_ = nullptr;
  Parameter<Real>* energy_ = nullptr;  // v, stored as [1 x hidden]
  Parameter<Real>* filters_ = nullptr;
  Parameter<Real>* gen_w_ = nullptr;
  Parameter<Real>* gen_b_ = nullptr;
  Parameter<Real>* gen_v_ = nullptr;
  std::vector<Real> prior_taps_;
};

extern template class EnergyAttention<float>;
extern template class EnergyAttention<double>;

}  // namespace locattn
