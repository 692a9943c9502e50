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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "locattn/attention/energy_attention.hpp"

namespace locattn {
namespace {

TEST(Mechanism, NamesRoundTripCaseInsensitively) {
  for (Mechanism m : kAllMechanisms) {
    const std::string name(mechanism_name(m));
    EXPECT_EQ(parse_mechanism(name), m);
    std::string lower = name;
    for (char& c : lower) c = static_cast<char>(std::tolower(c));
    EXPECT_EQ(parse_mechanism(lower), m);
  }
  EXPECT_THROW(parse_mechanism("GMMv3"), std::invalid_argument);
  EXPECT_THROW(parse_mechanism(""), std::invalid_argument);
}

TEST(EnergyConfig, PresetsSelectTheirTerms) {
  EXPECT_TRUE(EnergyConfig::cba().terms.use_query);
  EXPECT_TRUE(EnergyConfig::cba().terms.use_key);
  EXPECT_FALSE(EnergyConfig::cba().terms.use_static);
  EXPECT_TRUE(EnergyConfig::lsa().terms.use_static);
  EXPECT_EQ(EnergyConfig::lsa().static_filters, 32u);
  EXPECT_EQ(EnergyConfig::lsa().static_width, 31u);
  const EnergyConfig dca = EnergyConfig::dca();
  EXPECT_FALSE(dca.terms.use_query);
  EXPECT_FALSE(dca.terms.use_key);
  EXPECT_TRUE(dca.terms.use_dynamic);
  EXPECT_TRUE(dca.terms.use_prior);
  ASSERT_TRUE(dca.prior.has_value());
  EXPECT_EQ(dca.prior->taps.size(), 11u);
}

TEST(EnergyConfig, PriorTermNeedsAFilter) {
  EnergyConfig c = EnergyConfig::dca();
  c.prior.reset();
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

class EnergyMechanism : public ::testing::TestWithParam<Mechanism> {};

TEST_P(EnergyMechanism, WeightsFormADistributionAndStartOneHot) {
  EnergyConfig config = EnergyConfig::for_mechanism(GetParam());
  config.hidden = 8;
  config.generator_hidden = 8;
  ParameterSet<double> params;
  std::mt19937_64 rng(4);
  EnergyAttention<double> att(config, 5, 3, params, rng);
  Tape<double> tape;
  Tensor<double> h({9, 3});
  std::normal_distribution<double> g;
  for (auto& v : h.values()) v = g(rng);
  AttentionMemory memory = att.prepare(tape, tape.constant(h));
  AttentionCarry carry = att.initial(tape, memory);
  const auto a0 = tape.value(carry.alignment);
  EXPECT_DOUBLE_EQ(a0[0], 1.0);
  for (std::size_t j = 1; j < 9; ++j) EXPECT_EQ(a0[j], 0.0);
  for (int step = 0; step < 5; ++step) {
    Tensor<double> q({5});
    for (auto& v : q.values()) v = g(rng);
    AttentionStep s = att.attend(tape, tape.constant(q), memory, carry);
    double sum = 0.0;
    for (double w : tape.value(s.weights)) {
      EXPECT_GE(w, 0.0);
      sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    carry = s.carry;
  }
}

INSTANTIATE_TEST_SUITE_P(Energy, EnergyMechanism,
                         ::testing::Values(Mechanism::kCba, Mechanism::kLsa,
                                           Mechanism::kDca));

TEST(Dca, NoMassWhereThePriorForbidsIt) {
  EnergyConfig config = EnergyConfig::dca();
  config.hidden = 16;
  ParameterSet<double> params;
  std::mt19937_64 rng(6);
  EnergyAttention<double> att(config, 4, 2, params, rng);
  for (auto& p : params) {
    for (auto& v : p.value.values()) v *= 20.0;
  }
  Tape<double> tape;
  AttentionMemory memory = att.prepare(tape, tape.constant(Tensor<double>({30, 2}, 0.5)));
  std::vector<double> prev(30, 0.0);
  prev[12] = 0.7;
  prev[13] = 0.3;
  AttentionCarry carry;
  carry.alignment = tape.constant(Tensor<double>::vector(prev));
  AttentionStep s = att.attend(
      tape, tape.constant(Tensor<double>::vector({3.0, -3.0, 1.0, 0.0})), memory, carry);
  const auto w = tape.value(s.weights);
  for (std::size_t j = 0; j < 30; ++j) {
    if (j < 12 || j > 23) EXPECT_EQ(w[j], 0.0) << "position " << j;
  }
}

TEST(Dca, DynamicFiltersDependOnTheQuery) {
  EnergyConfig config = EnergyConfig::dca();
  config.hidden = 8;
  config.generator_hidden = 8;
  ParameterSet<double> params;
  std::mt19937_64 rng(7);
  EnergyAttention<double> att(config, 3, 2, params, rng);
  Tape<double> tape;
  Var g1 = att.dynamic_filters(tape, tape.constant(Tensor<double>::vector({1.0, 0.0, 0.0})));
  Var g2 = att.dynamic_filters(tape, tape.constant(Tensor<double>::vector({0.0, 1.0, 0.0})));
  EXPECT_EQ(tape.rows(g1), config.dynamic_filters);
  EXPECT_EQ(tape.cols(g1), config.dynamic_width);
  bool differ = false;
  for (std::size_t i = 0; i < tape.size(g1); ++i) differ |= tape.value(g1)[i] != tape.value(g2)[i];
  EXPECT_TRUE(differ);
}

}  // namespace
}  // namespace locattn
