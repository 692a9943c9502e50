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
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "locattn/attention/attention.hpp"

namespace locattn {

enum class GmmVersion { kV0, kV1, kV2 };

// V0 is the original unnormalized mixture (exp everywhere, Z = 1); V1
// normalizes weights/components and uses exp for offsets and variances; V2
// uses softplus for offsets and widths. The initial bias applies to V1/V2.
struct GmmVariant {
  GmmVersion version = GmmVersion::kV2;
  bool use_bias = false;

  // Throws for V0 with bias.
  void validate() const;
  static GmmVariant from_mechanism(Mechanism m);
};

// Intermediate MLP outputs, one K-vector each.
struct RawMixture {
  std::vector<double> w_hat;
  std::vector<double> delta_hat;
  std::vector<double> sigma_hat;
};

struct MixtureParams {
  std::vector<double> w;
  std::vector<double> delta;
  std::vector<double> sigma;
  std::vector<double> z;
  std::vector<double> mu;  // filled by gmm_weights
};

struct GmmState {
  std::vector<double> mu;  // component means in encoder-index units
};

MixtureParams convert_params(const RawMixture& raw, GmmVariant variant);

struct InitialBias {
  double delta_hat = 0.0;
  double sigma_hat = 0.0;
};

// Raw-space biases that make convert_params produce delta_target and
// sigma_target from a zero raw value. Throws for V0.
InitialBias initial_bias(GmmVariant variant, double delta_target = 1.0,
                         double sigma_target = 10.0);

// mu <- mu_prev + delta first, then alpha_j for j = 0..length-1. The
// weights are not renormalized. Throws if any sigma <= 0.
std::pair<std::vector<double>, GmmState> gmm_weights(
    const MixtureParams& params, const GmmState& state, std::size_t length);

struct GmmConfig {
  GmmVariant variant;
  std::size_t components = 5;
  std::size_t hidden = 128;
  double delta_target = 1.0;
  double sigma_target = 10.0;
  double output_init = 0.02;  // uniform range of the output weights V
};

// Tape-side mixture parameters for one decoder step.
struct MixtureVars {
  Var w;
  Var z;
  Var delta;
  Var sigma;
};

template <typename Real>
class GmmAttention final : public Attention<Real> {
 public:
  GmmAttention(GmmConfig config, std::size_t query_dim,
               ParameterSet<Real>& params, std::mt19937_64& rng,
               const std::string& prefix = "attention/gmm");

  const GmmConfig& config() const { return config_; }

  // (w_hat, delta_hat, sigma_hat) = V tanh(W s + b) + c, concatenated [3K].
  Var mlp(Tape<Real>& tape, Var query);
  MixtureVars convert(Tape<Real>& tape, Var raw);
  MixtureVars mixture(Tape<Real>& tape, Var query) {
    return convert(tape, mlp(tape, query));
  }

  AttentionMemory prepare(Tape<Real>& tape, Var encoder_outputs) override;
  AttentionCarry initial(Tape<Real>& tape,
                         const AttentionMemory& memory) override;
  AttentionStep attend(Tape<Real>& tape, Var query,
                       const AttentionMemory& memory,
                       const AttentionCarry& carry) override;

  Parameter<Real>& output_weights() { return *v_; }
  Parameter<Real>& output_bias() { return *c_; }

 private:
  GmmConfig config_;
  Parameter<Real>* w_;
  Parameter<Real>* b_;
  Parameter<Real>* v_;
  Parameter<Real>* c_;
};

extern template class GmmAttention<float>;
extern template class GmmAttention<double>;

}  // namespace locattn
