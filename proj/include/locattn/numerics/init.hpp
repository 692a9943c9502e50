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

#include <cmath>
#include <random>

#include "locattn/numerics/tape.hpp"

namespace locattn {

template <typename Real>
void init_uniform(Parameter<Real>& p, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : p.value.values()) {
    v = static_cast<Real>(dist(rng));
  }
}

// uniform(+-1/sqrt(fan_in))
template <typename Real>
void init_fan_in(Parameter<Real>& p, std::size_t fan_in, std::mt19937_64& rng) {
  init_uniform(p, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

}  // namespace locattn
