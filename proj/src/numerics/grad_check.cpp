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

#include "locattn/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace locattn {
namespace {

double finite_or_throw(double v) {
  if (!std::isfinite(v)) {
    throw std::domain_error("grad_check: non-finite loss");
  }
  return v;
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

}  // namespace

GradCheckResult grad_check(const InputLossFn& loss,
                           std::vector<Tensor<double>> inputs, double step) {
  auto evaluate = [&](bool with_grad, std::vector<std::vector<double>>* grads) {
    Tape<double> tape;
    std::vector<Var> vars;
    vars.reserve(inputs.size());
    for (const auto& t : inputs) {
      vars.push_back(tape.input(t));
    }
    const Var out = loss(tape, vars);
    const double value = finite_or_throw(tape.scalar(out));
    if (with_grad) {
      tape.backward(out);
      for (Var v : vars) {
        auto g = tape.grad(v);
        grads->emplace_back(g.begin(), g.end());
      }
    }
    return value;
  };

  std::vector<std::vector<double>> analytic;
  evaluate(true, &analytic);

  GradCheckResult result;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t c = 0; c < inputs[i].size(); ++c) {
      const double saved = inputs[i][c];
      inputs[i][c] = saved + step;
      const double up = evaluate(false, nullptr);
      inputs[i][c] = saved - step;
      const double down = evaluate(false, nullptr);
      inputs[i][c] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = relative_error(analytic[i][c], numeric);
      ++result.coordinates;
      if (err >= result.max_rel_error) {
        result.max_rel_error = err;
        result.worst =
            "input" + std::to_string(i) + "[" + std::to_string(c) + "]";
      }
    }
  }
  return result;
}

GradCheckResult grad_check_parameters(ParameterSet<double>& params,
                                      const ParamLossFn& loss, double step,
                                      std::size_t max_coords_per_param,
                                      std::uint64_t seed) {
  auto evaluate = [&](bool with_grad) {
    Tape<double> tape;
    const Var out = loss(tape);
    const double value = finite_or_throw(tape.scalar(out));
    if (with_grad) {
      tape.backward(out);
    }
    return value;
  };

  params.zero_grad();
  evaluate(true);

  std::mt19937_64 rng(seed);
  GradCheckResult result;
  for (auto& p : params) {
    std::vector<std::size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (max_coords_per_param > 0 && coords.size() > max_coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(max_coords_per_param);
    }
    for (std::size_t c : coords) {
      const double saved = p.value[c];
      p.value[c] = saved + step;
      const double up = evaluate(false);
      p.value[c] = saved - step;
      const double down = evaluate(false);
      p.value[c] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = relative_error(p.grad[c], numeric);
      ++result.coordinates;
      if (err >= result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = p.name + "[" + std::to_string(c) + "]";
      }
    }
  }
  return result;
}

}  // namespace locattn
