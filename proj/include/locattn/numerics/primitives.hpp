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

// Pure forward implementations of the differentiable primitives. The tape
// in tape.hpp records the same computations and adds reverse-mode partials.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace locattn {

enum class ConvMode {
  kCentered,  // "same" output, odd filter, window symmetric about j
  kCausal,    // output[j] reads signal[j - k] only, mass moves toward higher j
};

inline constexpr double kPriorLogitFloor = -1e6;

template <typename Real>
bool all_finite(std::span<const Real> x) {
  return std::all_of(x.begin(), x.end(),
                     [](Real v) { return std::isfinite(v); });
}

template <typename Real>
Real softplus(Real x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("softplus: non-finite input");
  }
  return x > Real(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <typename Real>
Real sigmoid(Real x) {
  if (x >= Real(0)) {
    return Real(1) / (Real(1) + std::exp(-x));
  }
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

template <typename Real>
void softmax_into(std::span<const Real> x, std::span<Real> out) {
  if (x.empty()) {
    throw std::invalid_argument("softmax: empty input");
  }
  if (!all_finite(x)) {
    throw std::domain_error("softmax: non-finite input");
  }
  const Real peak = *std::max_element(x.begin(), x.end());
  Real total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - peak);
    total += out[i];
  }
  for (auto& v : out) {
    v /= total;
  }
}

template <typename Real>
std::vector<Real> softmax(std::span<const Real> x) {
  std::vector<Real> out(x.size());
  softmax_into(x, std::span<Real>(out));
  return out;
}

// log(x) for x > 0, floored; nonpositive inputs map to the floor.
template <typename Real>
Real log_floor(Real x, Real floor) {
  if (!(x > Real(0))) {
    return floor;
  }
  return std::max(std::log(x), floor);
}

// Offset between tap index k and the signal index read for output j:
// output[j] += taps[k] * signal[j - k + conv_shift(...)].
inline std::ptrdiff_t conv_shift(std::size_t taps, ConvMode mode) {
  return mode == ConvMode::kCentered ? static_cast<std::ptrdiff_t>(taps / 2)
                                     : 0;
}

inline void check_conv_args(std::size_t signal, std::size_t taps,
                            ConvMode mode) {
  if (signal == 0 || taps == 0) {
    throw std::invalid_argument("conv1d: empty signal or taps");
  }
  if (mode == ConvMode::kCentered && taps % 2 == 0) {
    throw std::invalid_argument("conv1d: centered mode needs an odd filter");
  }
}

// Zero-padded convolution, output length equals signal length. Row n of a
// filter bank writes column n of the [L x N] output (stride = N).
template <typename Real>
void conv1d_into(std::span<const Real> signal, std::span<const Real> taps,
                 ConvMode mode, Real* out, std::size_t stride = 1) {
  check_conv_args(signal.size(), taps.size(), mode);
  const auto len = static_cast<std::ptrdiff_t>(signal.size());
  const auto width = static_cast<std::ptrdiff_t>(taps.size());
  const std::ptrdiff_t shift = conv_shift(taps.size(), mode);
  for (std::ptrdiff_t j = 0; j < len; ++j) {
    Real acc = 0;
    const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, j + shift - len + 1);
    const std::ptrdiff_t k_hi = std::min<std::ptrdiff_t>(width - 1, j + shift);
    for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) {
      acc += taps[k] * signal[j - k + shift];
    }
    out[j * static_cast<std::ptrdiff_t>(stride)] = acc;
  }
}

template <typename Real>
std::vector<Real> conv1d(std::span<const Real> signal,
                         std::span<const Real> taps, ConvMode mode) {
  std::vector<Real> out(signal.size());
  conv1d_into(signal, taps, mode, out.data());
  return out;
}

}  // namespace locattn
