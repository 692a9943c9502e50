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

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "locattn/numerics/tape.hpp"

namespace locattn {

enum class Mechanism {
  kCba,
  kLsa,
  kDca,
  kGmmV0,
  kGmmV1,
  kGmmV1b,
  kGmmV2,
  kGmmV2b,
};

inline constexpr std::array<Mechanism, 8> kAllMechanisms = {
    Mechanism::kCba,   Mechanism::kLsa,    Mechanism::kDca,
    Mechanism::kGmmV0, Mechanism::kGmmV1,  Mechanism::kGmmV1b,
    Mechanism::kGmmV2, Mechanism::kGmmV2b,
};

std::string_view mechanism_name(Mechanism m);
// Accepts the names above case-insensitively (e.g. "dca", "GMMv2b").
// Throws std::invalid_argument for anything else.
Mechanism parse_mechanism(std::string_view name);
bool is_gmm(Mechanism m);

// Per-sequence encoder memory seen by an attention mechanism.
struct AttentionMemory {
  Var values;  // encoder outputs H, [L x d]
  Var keys;    // mechanism-specific projection of H, may be invalid
  std::size_t length = 0;
};

// State carried between decoder steps: the previous alignment, plus the
// component means for GMM mechanisms.
struct AttentionCarry {
  Var alignment;
  Var means;
};

struct AttentionStep {
  Var weights;  // alpha_i, length L
  AttentionCarry carry;
};

template <typename Real>
class Attention {
 public:
  virtual ~Attention() = default;

  virtual AttentionMemory prepare(Tape<Real>& tape, Var encoder_outputs) = 0;
  // alpha_0 is one-hot at encoder position 0.
  virtual AttentionCarry initial(Tape<Real>& tape,
                                 const AttentionMemory& memory) = 0;
  virtual AttentionStep attend(Tape<Real>& tape, Var query,
                               const AttentionMemory& memory,
                               const AttentionCarry& carry) = 0;
};

}  // namespace locattn
