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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "locattn/numerics/tape.hpp"

namespace locattn {

struct GradCheckResult {
  // max over coordinates of |analytic - numeric| / max(1, |numeric|)
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst;  // "<input or parameter>[index]"
};

inline constexpr double kGradCheckStep = 1e-5;

using InputLossFn = std::function<Var(Tape<double>&, std::span<const Var>)>;
using ParamLossFn = std::function<Var(Tape<double>&)>;

// Central differences against the tape gradient w.r.t. every input
// coordinate. Throws std::domain_error if the loss is non-finite.
GradCheckResult grad_check(const InputLossFn& loss,
                           std::vector<Tensor<double>> inputs,
                           double step = kGradCheckStep);

// Same, w.r.t. parameters bound by the loss builder. When
// max_coords_per_param > 0 a seeded subset of each parameter is probed.
GradCheckResult grad_check_parameters(ParameterSet<double>& params,
                                      const ParamLossFn& loss,
                                      double step = kGradCheckStep,
                                      std::size_t max_coords_per_param = 0,
                                      std::uint64_t seed = 0);

}  // namespace locattn
