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

#include "locattn/attention/attention.hpp"
#include "locattn/numerics/grad_check.hpp"
#include "locattn/seq2seq/model.hpp"

namespace locattn {

// A model small enough for exhaustive finite differences.
ModelConfig tiny_model_config(Mechanism mechanism);

// Finite-difference check of the full teacher-forced loss (encoder,
// attention, decoder) w.r.t. every model parameter, in double precision.
// max_coords_per_param = 0 probes every coordinate.
GradCheckResult check_model_gradients(Mechanism mechanism, std::uint64_t seed,
                                      std::size_t max_coords_per_param = 0);

inline constexpr double kGradCheckTolerance = 1e-4;

}  // namespace locattn
