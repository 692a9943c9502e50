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

#include "locattn/attention/gmm_attention.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "locattn/numerics/init.hpp"
#include "locattn/numerics/primitives.hpp"

namespace locattn {
namespace {

void require_finite(const std::vector<double>& v, const char* what) {
  if (!all_finite<double>(v)) {
    throw std::domain_error(std::string("convert_params: non-finite ") + what);
  }
}

// Inverse of softplus for y > 0.
double inverse_softplus(double y) { return y + std::log(-std::expm1(-y)); }

}  // namespace

void GmmVariant::validate() const {
  if (version == GmmVersion::kV0 && use_bias) {
    throw std::invalid_argument("GMM V0 does not support the initial bias");
  }
}

GmmVariant GmmVariant::from_mechanism(Mechanism m) {
  switch (m) {
    case Mechanism::kGmmV0:
      return {GmmVersion::kV0, false};
    case Mechanism::kGmmV1:
      return {GmmVersion::kV1, false};
    case Mechanism::kGmmV1b:
      return {GmmVersion::kV1, true};
    case Mechanism::kGmmV2:
      return {GmmVersion::kV2, false};
    case Mechanism::kGmmV2b:
      return {GmmVersion::kV2, true};
    default:
      throw std::invalid_argument("not a GMM mechanism: " +
                                  std::string(mechanism_name(m)));
  }
}

MixtureParams convert_params(const RawMixture& raw, GmmVariant variant) {
  const std::size_t k = raw.w_hat.size();
  if (raw.delta_hat.size() != k || raw.sigma_hat.size() != k || k == 0) {
    throw std::invalid_argument("convert_params: component count mismatch");
  }
  require_finite(raw.w_hat, "w_hat");
  require_finite(raw.delta_hat, "delta_hat");
  require_finite(raw.sigma_hat, "sigma_hat");

  MixtureParams out;
  out.w.resize(k);
  out.delta.resize(k);
  out.sigma.resize(k);
  out.z.resize(k);
  switch (variant.version) {
    case GmmVersion::kV0:
      for (std::size_t i = 0; i < k; ++i) {
        out.z[i] = 1.0;
        out.w[i] = std::exp(raw.w_hat[i]);
        out.delta[i] = std::exp(raw.delta_hat[i]);
        out.sigma[i] = std::sqrt(std::exp(-raw.sigma_hat[i]) / 2.0);
      }
      break;
    case GmmVersion::kV1:
      out.w = softmax<double>(raw.w_hat);
      for (std::size_t i = 0; i < k; ++i) {
        out.delta[i] = std::exp(raw.delta_hat[i]);
        out.sigma[i] = std::sqrt(std::exp(raw.sigma_hat[i]));
      }
      break;
    case GmmVersion::kV2:
      out.w = softmax<double>(raw.w_hat);
      for (std::size_t i = 0; i < k; ++i) {
        out.delta[i] = softplus(raw.delta_hat[i]);
        out.sigma[i] = softplus(raw.sigma_hat[i]);
      }
      break;
  }
  if (variant.version != GmmVersion::kV0) {
    for (std::size_t i = 0; i < k; ++i) {
      out.z[i] = std::sqrt(2.0 * std::numbers::pi * out.sigma[i] * out.sigma[i]);
    }
  }
  return out;
}

InitialBias initial_bias(GmmVariant variant, double delta_target,
                         double sigma_target) {
  if (!(delta_target > 0.0) || !(sigma_target > 0.0)) {
    throw std::invalid_argument("initial_bias: targets must be positive");
  }
  switch (variant.version) {
    case GmmVersion::kV0:
      throw std::invalid_argument("initial_bias: unsupported for GMM V0");
    case GmmVersion::kV1:
      // delta = e^x, sigma = sqrt(e^x)
      return {std::log(delta_target), 2.0 * std::log(sigma_target)};
    case GmmVersion::kV2:
      return {inverse_softplus(delta_target), inverse_softplus(sigma_target)};
  }
  return {};
}

std::pair<std::vector<double>, GmmState> gmm_weights(
    const MixtureParams& params, const GmmState& state, std::size_t length) {
  const std::size_t k = params.w.size();
  if (params.delta.size() != k || params.sigma.size() != k ||
      params.z.size() != k || state.mu.size() != k) {
    throw std::invalid_argument("gmm_weights: component count mismatch");
  }
  if (length == 0) {
    throw std::invalid_argument("gmm_weights: length must be positive");
  }
  for (double s : params.sigma) {
    if (!(s > 0.0)) {
      throw std::domain_error("gmm_weights: sigma must be positive");
    }
  }
  GmmState next;
  next.mu.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    next.mu[i] = state.mu[i] + params.delta[i];
  }
  std::vector<double> alpha(length, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double coef = params.w[i] / params.z[i];
    const double two_var = 2.0 * params.sigma[i] * params.sigma[i];
    for (std::size_t j = 0; j < length; ++j) {
      const double d = static_cast<double>(j) - next.mu[i];
      alpha[j] += coef * std::exp(-d * d / two_var);
    }
  }
  return {std::move(alpha), std::move(next)};
}

// ---------------------------------------------------------------------------

template <typename Real>
GmmAttention<Real>::GmmAttention(GmmConfig config, std::size_t query_dim,
                                 ParameterSet<Real>& params,
                                 std::mt19937_64& rng,
                                 const std::string& prefix)
    : config_(config) {
  config_.variant.validate();
  if (config_.components == 0 || config_.hidden == 0 || query_dim == 0) {
    throw std::invalid_argument("GmmAttention: zero-sized dimension");
  }
  const std::size_t k = config_.components;
  w_ = &params.add(prefix + "/W", {config_.hidden, query_dim});
  b_ = &params.add(prefix + "/b", {config_.hidden});
  v_ = &params.add(prefix + "/V", {3 * k, config_.hidden});
  c_ = &params.add(prefix + "/c", {3 * k});
  init_fan_in(*w_, query_dim, rng);
  init_uniform(*v_, config_.output_init, rng);
  if (config_.variant.use_bias) {
    const InitialBias bias =
        initial_bias(config_.variant, config_.delta_target, config_.sigma_target);
    for (std::size_t i = 0; i < k; ++i) {
      c_->value[k + i] = static_cast<Real>(bias.delta_hat);
      c_->value[2 * k + i] = static_cast<Real>(bias.sigma_hat);
    }
  }
}

template <typename Real>
Var GmmAttention<Real>::mlp(Tape<Real>& tape, Var query) {
  if (tape.size(query) != w_->value.cols()) {
    throw std::invalid_argument("GmmAttention: query dimension mismatch");
  }
  Var hidden = tape.tanh(
      tape.add(tape.matvec(tape.param(*w_), query), tape.param(*b_)));
  return tape.add(tape.matvec(tape.param(*v_), hidden), tape.param(*c_));
}

template <typename Real>
MixtureVars GmmAttention<Real>::convert(Tape<Real>& tape, Var raw) {
  const std::size_t k = config_.components;
  Var w_hat = tape.slice(raw, 0, k);
  Var delta_hat = tape.slice(raw, k, k);
  Var sigma_hat = tape.slice(raw, 2 * k, k);
  MixtureVars m;
  switch (config_.variant.version) {
    case GmmVersion::kV0: {
      m.w = tape.exp(w_hat);
      m.delta = tape.exp(delta_hat);
      m.sigma =
          tape.sqrt(tape.scale(tape.exp(tape.scale(sigma_hat, Real(-1))), Real(0.5)));
      const std::vector<Real> ones(k, Real(1));
      m.z = tape.constant(ones, k);
      return m;
    }
    case GmmVersion::kV1:
      m.w = tape.softmax(w_hat);
      m.delta = tape.exp(delta_hat);
      m.sigma = tape.sqrt(tape.exp(sigma_hat));
      break;
    case GmmVersion::kV2:
      m.w = tape.softmax(w_hat);
      m.delta = tape.softplus(delta_hat);
      m.sigma = tape.softplus(sigma_hat);
      break;
  }
  m.z = tape.scale(m.sigma, static_cast<Real>(std::sqrt(2.0 * std::numbers::pi)));
  return m;
}

template <typename Real>
AttentionMemory GmmAttention<Real>::prepare(Tape<Real>& tape,
                                            Var encoder_outputs) {
  return {encoder_outputs, Var{}, tape.rows(encoder_outputs)};
}

template <typename Real>
AttentionCarry GmmAttention<Real>::initial(Tape<Real>& tape,
                                           const AttentionMemory& memory) {
  std::vector<Real> one_hot(memory.length, Real(0));
  one_hot[0] = Real(1);
  return {tape.constant(one_hot, memory.length),
          tape.zeros(config_.components)};
}

template <typename Real>
AttentionStep GmmAttention<Real>::attend(Tape<Real>& tape, Var query,
                                         const AttentionMemory& memory,
                                         const AttentionCarry& carry) {
  const MixtureVars m = mixture(tape, query);
  Var mu = tape.add(carry.means, m.delta);
  Var weights = tape.gaussian_mixture(m.w, m.z, mu, m.sigma, memory.length);
  return {weights, {weights, mu}};
}

template class GmmAttention<float>;
template class GmmAttention<double>;

}  // namespace locattn
