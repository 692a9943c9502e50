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

#include "locattn/attention/attention.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace locattn {

std::string_view mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::kCba:
      return "CBA";
    case Mechanism::kLsa:
      return "LSA";
    case Mechanism::kDca:
      return "DCA";
    case Mechanism::kGmmV0:
      return "GMMv0";
    case Mechanism::kGmmV1:
      return "GMMv1";
    case Mechanism::kGmmV1b:
      return "GMMv1b";
    case Mechanism::kGmmV2:
      return "GMMv2";
    case Mechanism::kGmmV2b:
      return "GMMv2b";
  }
  return "?";
}

Mechanism parse_mechanism(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
  };
  const std::string wanted = lower(name);
  for (Mechanism m : kAllMechanisms) {
    if (lower(mechanism_name(m)) == wanted) {
      return m;
    }
  }
  throw std::invalid_argument("unknown mechanism: " + std::string(name));
}

bool is_gmm(Mechanism m) {
  return m != Mechanism::kCba && m != Mechanism::kLsa && m != Mechanism::kDca;
}

}  // namespace locattn
