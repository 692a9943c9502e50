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

#include "locattn/numerics/grad_check.hpp"
#include "locattn/numerics/tape.hpp"

namespace locattn {
namespace {

Tensor<double> random_tensor(std::mt19937_64& rng, Shape shape, double lo = -1.0,
                             double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.values()) v = u(rng);
  return t;
}

// Each case reduces to a scalar through a random projection so that every
// output coordinate carries a distinct gradient.
struct OpCase {
  const char* name;
  std::vector<Shape> shapes;
  std::function<Var(Tape<double>&, std::span<const Var>)> build;
  double lo = -1.0;
  double hi = 1.0;
};

Var project(Tape<double>& t, Var y) {
  std::vector<double> w(t.size(y));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::cos(1.3 * static_cast<double>(i) + 0.4);
  Var c = t.constant(Tensor<double>({t.rows(y), t.cols(y)}, w));
  return t.dot(y, c);
}

class TapeOpGrad : public ::testing::TestWithParam<OpCase> {};

TEST_P(TapeOpGrad, MatchesFiniteDifferences) {
  const OpCase& c = GetParam();
  std::mt19937_64 rng(17);
  std::vector<Tensor<double>> inputs;
  for (const auto& s : c.shapes) inputs.push_back(random_tensor(rng, s, c.lo, c.hi));
  const GradCheckResult r = grad_check(
      [&](Tape<double>& t, std::span<const Var> v) { return project(t, c.build(t, v)); },
      inputs);
  EXPECT_LT(r.max_rel_error, 1e-7) << c.name << " worst " << r.worst;
  EXPECT_GT(r.coordinates, 0u);
}

using V = std::span<const Var>;
INSTANTIATE_TEST_SUITE_P(
    AllOps, TapeOpGrad,
    ::testing::Values(
        OpCase{"add", {{4}, {4}}, [](Tape<double>& t, V v) { return t.add(v[0], v[1]); }},
        OpCase{"sub", {{4}, {4}}, [](Tape<double>& t, V v) { return t.sub(v[0], v[1]); }},
        OpCase{"mul", {{4}, {4}}, [](Tape<double>& t, V v) { return t.mul(v[0], v[1]); }},
        OpCase{"mul_self", {{4}}, [](Tape<double>& t, V v) { return t.mul(v[0], v[0]); }},
        OpCase{"scale", {{3}}, [](Tape<double>& t, V v) { return t.scale(v[0], -2.5); }},
        OpCase{"shift", {{3}}, [](Tape<double>& t, V v) { return t.shift(v[0], 0.7); }},
        OpCase{"tanh", {{5}}, [](Tape<double>& t, V v) { return t.tanh(v[0]); }},
        OpCase{"sigmoid", {{5}}, [](Tape<double>& t, V v) { return t.sigmoid(v[0]); }},
        OpCase{"exp", {{5}}, [](Tape<double>& t, V v) { return t.exp(v[0]); }},
        OpCase{"softplus", {{5}}, [](Tape<double>& t, V v) { return t.softplus(v[0]); }},
        OpCase{"sqrt", {{5}}, [](Tape<double>& t, V v) { return t.sqrt(v[0]); }, 0.5, 2.0},
        OpCase{"log_floor", {{5}}, [](Tape<double>& t, V v) { return t.log_floor(v[0], -1e6); }, 0.1, 2.0},
        OpCase{"softmax", {{6}}, [](Tape<double>& t, V v) { return t.softmax(v[0]); }},
        OpCase{"matvec", {{3, 4}, {4}}, [](Tape<double>& t, V v) { return t.matvec(v[0], v[1]); }},
        OpCase{"matvec_t", {{3, 4}, {3}}, [](Tape<double>& t, V v) { return t.matvec_t(v[0], v[1]); }},
        OpCase{"rows_matvec", {{3, 4}, {5, 4}}, [](Tape<double>& t, V v) { return t.rows_matvec(v[0], v[1]); }},
        OpCase{"add_rows", {{5, 3}, {3}}, [](Tape<double>& t, V v) { return t.add_rows(v[0], v[1]); }},
        OpCase{"conv1d_causal", {{7}, {3}}, [](Tape<double>& t, V v) { return t.conv1d(v[0], v[1], ConvMode::kCausal); }},
        OpCase{"conv1d_centered", {{7}, {5}}, [](Tape<double>& t, V v) { return t.conv1d(v[0], v[1], ConvMode::kCentered); }},
        OpCase{"conv_bank", {{6}, {3, 5}}, [](Tape<double>& t, V v) { return t.conv_bank(v[0], v[1], ConvMode::kCentered); }},
        OpCase{"gaussian_mixture", {{3}, {3}, {3}, {3}},
               [](Tape<double>& t, V v) {
                 Var z = t.shift(t.exp(v[1]), 0.5);
                 Var sigma = t.shift(t.exp(v[3]), 0.5);
                 Var mu = t.scale(v[2], 4.0);
                 return t.gaussian_mixture(v[0], z, mu, sigma, 8);
               }},
        OpCase{"concat_slice", {{3}, {2}},
               [](Tape<double>& t, V v) {
                 const Var parts[] = {v[0], v[1], v[0]};
                 return t.slice(t.concat(parts), 1, 6);
               }},
        OpCase{"reshape", {{6}}, [](Tape<double>& t, V v) { return t.reshape(v[0], 2, 3); }},
        OpCase{"sum", {{5}}, [](Tape<double>& t, V v) { return t.sum(v[0]); }},
        OpCase{"dot", {{4}, {4}}, [](Tape<double>& t, V v) { return t.dot(v[0], v[1]); }},
        OpCase{"sum_squares", {{4}}, [](Tape<double>& t, V v) { return t.sum_squares(v[0]); }}),
    [](const ::testing::TestParamInfo<OpCase>& info) { return std::string(info.param.name); });

TEST(Tape, ReplayIsBitExact) {
  std::mt19937_64 rng(3);
  Tape<double> t;
  Var x = t.input(random_tensor(rng, {6}));
  Var m = t.input(random_tensor(rng, {4, 6}));
  Var y = t.softmax(t.tanh(t.matvec(m, x)));
  Var z = t.conv1d(y, t.constant(Tensor<double>::vector({0.2, 0.5, 0.3})), ConvMode::kCausal);
  Var loss = t.sum_squares(z);
  const std::vector<double> before(t.value(z).begin(), t.value(z).end());
  const double l0 = t.scalar(loss);
  t.replay();
  const std::vector<double> after(t.value(z).begin(), t.value(z).end());
  EXPECT_EQ(before, after);
  EXPECT_EQ(l0, t.scalar(loss));
}

TEST(Tape, ParameterGradientsAccumulateAcrossBackwardCalls) {
  ParameterSet<double> params;
  auto& p = params.add("p", {3});
  p.value.values() = {1.0, 2.0, 3.0};
  for (int pass = 1; pass <= 2; ++pass) {
    Tape<double> t;
    t.backward(t.sum_squares(t.param(p)));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(p.grad[i], pass * 2.0 * p.value[i]);
  }
  params.zero_grad();
  EXPECT_EQ(p.grad[0], 0.0);
}

TEST(Tape, ParamBindingIsCachedPerTape) {
  ParameterSet<double> params;
  auto& p = params.add("p", {2});
  Tape<double> t;
  EXPECT_EQ(t.param(p).id, t.param(p).id);
}

TEST(Tape, RewindDropsLaterNodesAndKeepsEarlierValues) {
  Tape<double> t;
  Var a = t.input(Tensor<double>::vector({1.0, 2.0}));
  Var b = t.exp(a);
  const auto mark = t.mark();
  t.tanh(b);
  t.sum(b);
  EXPECT_EQ(t.node_count(), 4u);
  t.rewind(mark);
  EXPECT_EQ(t.node_count(), 2u);
  EXPECT_DOUBLE_EQ(t.value(b)[1], std::exp(2.0));
}

TEST(Tape, ShapeMismatchThrows) {
  Tape<double> t;
  Var a = t.input(Tensor<double>::vector({1.0, 2.0}));
  Var b = t.input(Tensor<double>::vector({1.0, 2.0, 3.0}));
  EXPECT_THROW(t.add(a, b), std::invalid_argument);
  Var m = t.input(Tensor<double>({2, 2}, 1.0));
  EXPECT_THROW(t.matvec(m, b), std::invalid_argument);
}

TEST(Tape, FloatAndDoubleAgree) {
  Tape<float> tf;
  Tape<double> td;
  const std::vector<float> xf = {0.3f, -1.2f, 2.0f};
  const std::vector<double> xd = {0.3f, -1.2f, 2.0f};
  Var yf = tf.softmax(tf.tanh(tf.input(xf, 3)));
  Var yd = td.softmax(td.tanh(td.input(xd, 3)));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(tf.value(yf)[i], td.value(yd)[i], 1e-6);
}

TEST(GradCheck, ReportsErrorWhenStepStraddlesASingularity) {
  const GradCheckResult r = grad_check(
      [](Tape<double>& t, std::span<const Var> v) { return t.sum(t.sqrt(v[0])); },
      {Tensor<double>::vector({1e-4})}, 1e-4);
  EXPECT_GT(r.max_rel_error, 1e-3);
}

TEST(GradCheck, NonFiniteLossThrows) {
  EXPECT_THROW(grad_check(
                   [](Tape<double>& t, std::span<const Var> v) {
                     return t.sum(t.scale(t.exp(v[0]), 1e308));
                   },
                   {Tensor<double>::vector({800.0})}),
               std::domain_error);
}

}  // namespace
}  // namespace locattn
