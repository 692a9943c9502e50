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
#include <deque>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "locattn/numerics/primitives.hpp"
#include "locattn/numerics/tensor.hpp"

namespace locattn {

// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::uint32_t kInvalid = UINT32_MAX;
  std::uint32_t id = kInvalid;

  bool valid() const { return id != kInvalid; }
  friend bool operator==(Var, Var) = default;
};

template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real> value;
  Tensor<Real> grad;
};

// Named trainable tensors. Storage is a deque so references stay valid as
// parameters are added.
template <typename Real>
class ParameterSet {
 public:
  Parameter<Real>& add(std::string name, Shape shape);
  Parameter<Real>& get(const std::string& name);
  const Parameter<Real>& get(const std::string& name) const;
  Parameter<Real>* find(const std::string& name);
  const Parameter<Real>* find(const std::string& name) const;

  void zero_grad();
  std::size_t count() const { return params_.size(); }
  std::size_t total_size() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::deque<Parameter<Real>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Reverse-mode tape over vector/matrix valued nodes (rank <= 2, row-major).
//
// Every node stores its operation and operands, so replay() recomputes all
// derived values from the leaves in recording order. Values live in one
// arena; mark()/rewind() drop everything recorded after a mark, which lets
// a free-running decoder reuse the encoder nodes across steps.
template <typename Real>
class Tape {
 public:
  struct Mark {
    std::size_t nodes = 0;
    std::size_t values = 0;
    std::size_t operands = 0;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  // Leaves. constant() never receives a gradient; input() does.
  Var constant(std::span<const Real> values, std::size_t rows,
               std::size_t cols = 1);
  Var constant(const Tensor<Real>& t) {
    return constant(t.data(), t.rows(), t.cols());
  }
  Var zeros(std::size_t rows, std::size_t cols = 1);
  Var input(std::span<const Real> values, std::size_t rows,
            std::size_t cols = 1);
  Var input(const Tensor<Real>& t) { return input(t.data(), t.rows(), t.cols()); }
  // Binds a parameter once per tape; backward() accumulates into p.grad.
  Var param(Parameter<Real>& p);

  // Elementwise.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, Real factor);
  Var shift(Var a, Real offset);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var exp(Var a);
  Var softplus(Var a);
  Var sqrt(Var a);
  Var log_floor(Var a, Real floor);
  Var softmax(Var a);

  // Linear algebra. Matrices are [rows x cols].
  Var matvec(Var m, Var x);       // m x
  Var matvec_t(Var m, Var x);     // m^T x
  Var rows_matvec(Var m, Var x);  // x is [L x in], result [L x out] = x m^T
  Var add_rows(Var x, Var b);     // b added to every row of x

  // Zero-padded 1-D convolution of a length-L signal, see primitives.hpp.
  Var conv1d(Var signal, Var taps, ConvMode mode);
  // filters is [N x F]; result is [L x N].
  Var conv_bank(Var signal, Var filters, ConvMode mode);

  // alpha_j = sum_k w_k / z_k * exp(-(j - mu_k)^2 / (2 sigma_k^2)),
  // j = 0..length-1. Throws if any sigma_k <= 0.
  Var gaussian_mixture(Var w, Var z, Var mu, Var sigma, std::size_t length);

  Var concat(std::span<const Var> parts);
  Var slice(Var a, std::size_t offset, std::size_t length);
  Var reshape(Var a, std::size_t rows, std::size_t cols);

  // Reductions to a scalar.
  Var sum(Var a);
  Var dot(Var a, Var b);
  Var sum_squares(Var a);

  void backward(Var loss);
  void replay();

  Mark mark() const { return {nodes_.size(), values_.size(), operands_.size()}; }
  void rewind(Mark m);
  void clear() { rewind(Mark{}); }

  std::span<const Real> value(Var v) const;
  Real scalar(Var v) const;
  // Valid after backward(); zero for nodes that do not reach the loss.
  std::span<const Real> grad(Var v) const;
  Tensor<Real> tensor(Var v) const;

  std::size_t rows(Var v) const { return node(v).rows; }
  std::size_t cols(Var v) const { return node(v).cols; }
  std::size_t size(Var v) const { return node(v).size(); }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kConstant,
    kInput,
    kParam,
    kAdd,
    kSub,
    kMul,
    kScale,
    kShift,
    kTanh,
    kSigmoid,
    kExp,
    kSoftplus,
    kSqrt,
    kLogFloor,
    kSoftmax,
    kMatVec,
    kMatVecT,
    kRowsMatVec,
    kAddRows,
    kConv1d,
    kConvBank,
    kGaussianMixture,
    kConcat,
    kSlice,
    kReshape,
    kSum,
    kDot,
    kSumSquares,
  };

  struct Node {
    Op op = Op::kConstant;
    bool needs_grad = false;
    std::uint32_t a = Var::kInvalid;
    std::uint32_t b = Var::kInvalid;
    std::uint32_t c = Var::kInvalid;
    std::uint32_t d = Var::kInvalid;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    Real aux = 0;
    std::size_t extra = 0;

    std::size_t size() const { return rows * cols; }
  };

  const Node& node(Var v) const;
  Var push(Node n);
  void evaluate(const Node& n);
  void propagate(const Node& n);
  Real* val(std::uint32_t id) { return values_.data() + nodes_[id].offset; }
  const Real* val(std::uint32_t id) const {
    return values_.data() + nodes_[id].offset;
  }
  Real* grd(std::uint32_t id) { return grads_.data() + nodes_[id].offset; }
  bool grad_of(std::uint32_t id) const { return nodes_[id].needs_grad; }
  Var unary(Op op, Var a, Real aux = 0);
  Var binary(Op op, Var a, Var b);
  void require_same_size(Var a, Var b, const char* what) const;

  std::vector<Node> nodes_;
  std::vector<Real> values_;
  std::vector<Real> grads_;
  std::vector<std::uint32_t> operands_;
  std::vector<Parameter<Real>*> bound_;
  std::unordered_map<const Parameter<Real>*, Var> param_cache_;
};

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace locattn
