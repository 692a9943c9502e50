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

#include "locattn/numerics/tape.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace locattn {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    os << (i ? "x" : "") << shape[i];
  }
  os << ']';
  return os.str();
}

template <typename Real>
Parameter<Real>& ParameterSet<Real>::add(std::string name, Shape shape) {
  if (index_.count(name)) {
    throw std::invalid_argument("duplicate parameter: " + name);
  }
  index_.emplace(name, params_.size());
  Parameter<Real> p;
  p.name = std::move(name);
  p.value = Tensor<Real>(shape);
  p.grad = Tensor<Real>(std::move(shape));
  params_.push_back(std::move(p));
  return params_.back();
}

template <typename Real>
Parameter<Real>* ParameterSet<Real>::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

template <typename Real>
const Parameter<Real>* ParameterSet<Real>::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

template <typename Real>
Parameter<Real>& ParameterSet<Real>::get(const std::string& name) {
  if (auto* p = find(name)) {
    return *p;
  }
  throw std::out_of_range("unknown parameter: " + name);
}

template <typename Real>
const Parameter<Real>& ParameterSet<Real>::get(const std::string& name) const {
  if (const auto* p = find(name)) {
    return *p;
  }
  throw std::out_of_range("unknown parameter: " + name);
}

template <typename Real>
void ParameterSet<Real>::zero_grad() {
  for (auto& p : params_) {
    p.grad.fill(Real(0));
  }
}

template <typename Real>
std::size_t ParameterSet<Real>::total_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    n += p.value.size();
  }
  return n;
}

// ---------------------------------------------------------------------------

template <typename Real>
const typename Tape<Real>::Node& Tape<Real>::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw std::out_of_range("Tape: invalid variable");
  }
  return nodes_[v.id];
}

template <typename Real>
Var Tape<Real>::push(Node n) {
  n.offset = values_.size();
  values_.resize(values_.size() + n.size());
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(n);
  if (n.op != Op::kConstant && n.op != Op::kInput && n.op != Op::kParam) {
    evaluate(nodes_.back());
  }
  return Var{id};
}

template <typename Real>
Var Tape<Real>::constant(std::span<const Real> values, std::size_t rows,
                         std::size_t cols) {
  if (values.size() != rows * cols) {
    throw std::invalid_argument("Tape::constant: size mismatch");
  }
  Node n;
  n.op = Op::kConstant;
  n.rows = rows;
  n.cols = cols;
  Var v = push(n);
  std::copy(values.begin(), values.end(), val(v.id));
  return v;
}

template <typename Real>
Var Tape<Real>::zeros(std::size_t rows, std::size_t cols) {
  Node n;
  n.op = Op::kConstant;
  n.rows = rows;
  n.cols = cols;
  return push(n);
}

template <typename Real>
Var Tape<Real>::input(std::span<const Real> values, std::size_t rows,
                      std::size_t cols) {
  Var v = constant(values, rows, cols);
  nodes_[v.id].op = Op::kInput;
  nodes_[v.id].needs_grad = true;
  return v;
}

template <typename Real>
Var Tape<Real>::param(Parameter<Real>& p) {
  if (auto it = param_cache_.find(&p); it != param_cache_.end()) {
    return it->second;
  }
  Var v = constant(p.value.data(), p.value.rows(), p.value.cols());
  Node& n = nodes_[v.id];
  n.op = Op::kParam;
  n.needs_grad = true;
  n.extra = bound_.size();
  bound_.push_back(&p);
  param_cache_.emplace(&p, v);
  return v;
}

template <typename Real>
void Tape<Real>::require_same_size(Var a, Var b, const char* what) const {
  if (node(a).size() != node(b).size()) {
    throw std::invalid_argument(std::string("Tape::") + what +
                                ": operand size mismatch");
  }
}

template <typename Real>
Var Tape<Real>::binary(Op op, Var a, Var b) {
  const Node& src = node(a);
  Node n;
  n.op = op;
  n.a = a.id;
  n.b = b.id;
  n.rows = src.rows;
  n.cols = src.cols;
  n.needs_grad = src.needs_grad || node(b).needs_grad;
  return push(n);
}

template <typename Real>
Var Tape<Real>::unary(Op op, Var a, Real aux) {
  const Node& src = node(a);
  Node n;
  n.op = op;
  n.a = a.id;
  n.rows = src.rows;
  n.cols = src.cols;
  n.aux = aux;
  n.needs_grad = src.needs_grad;
  return push(n);
}

template <typename Real>
Var Tape<Real>::add(Var a, Var b) {
  require_same_size(a, b, "add");
  return binary(Op::kAdd, a, b);
}

template <typename Real>
Var Tape<Real>::sub(Var a, Var b) {
  require_same_size(a, b, "sub");
  return binary(Op::kSub, a, b);
}

template <typename Real>
Var Tape<Real>::mul(Var a, Var b) {
  require_same_size(a, b, "mul");
  return binary(Op::kMul, a, b);
}

template <typename Real>
Var Tape<Real>::scale(Var a, Real factor) {
  return unary(Op::kScale, a, factor);
}

template <typename Real>
Var Tape<Real>::shift(Var a, Real offset) {
  return unary(Op::kShift, a, offset);
}

template <typename Real>
Var Tape<Real>::tanh(Var a) {
  return unary(Op::kTanh, a);
}

template <typename Real>
Var Tape<Real>::sigmoid(Var a) {
  return unary(Op::kSigmoid, a);
}

template <typename Real>
Var Tape<Real>::exp(Var a) {
  return unary(Op::kExp, a);
}

template <typename Real>
Var Tape<Real>::softplus(Var a) {
  return unary(Op::kSoftplus, a);
}

template <typename Real>
Var Tape<Real>::sqrt(Var a) {
  return unary(Op::kSqrt, a);
}

template <typename Real>
Var Tape<Real>::log_floor(Var a, Real floor) {
  return unary(Op::kLogFloor, a, floor);
}

template <typename Real>
Var Tape<Real>::softmax(Var a) {
  return unary(Op::kSoftmax, a);
}

template <typename Real>
Var Tape<Real>::matvec(Var m, Var x) {
  const Node& nm = node(m);
  const Node& nx = node(x);
  if (nm.cols != nx.size()) {
    throw std::invalid_argument("Tape::matvec: dimension mismatch");
  }
  Node n;
  n.op = Op::kMatVec;
  n.a = m.id;
  n.b = x.id;
  n.rows = nm.rows;
  n.cols = 1;
  n.needs_grad = nm.needs_grad || nx.needs_grad;
  return push(n);
}

template <typename Real>
Var Tape<Real>::matvec_t(Var m, Var x) {
  const Node& nm = node(m);
  const Node& nx = node(x);
  if (nm.rows != nx.size()) {
    throw std::invalid_argument("Tape::matvec_t: dimension mismatch");
  }
  Node n;
  n.op = Op::kMatVecT;
  n.a = m.id;
  n.b = x.id;
  n.rows = nm.cols;
  n.cols = 1;
  n.needs_grad = nm.needs_grad || nx.needs_grad;
  return push(n);
}

template <typename Real>
Var Tape<Real>::rows_matvec(Var m, Var x) {
  const Node& nm = node(m);
  const Node& nx = node(x);
  if (nm.cols != nx.cols) {
    throw std::invalid_argument("Tape::rows_matvec: dimension mismatch");
  }
  Node n;
  n.op = Op::kRowsMatVec;
  n.a = m.id;
  n.b = x.id;
  n.rows = nx.rows;
  n.cols = nm.rows;
  n.needs_grad = nm.needs_grad || nx.needs_grad;
  return push(n);
}

template <typename Real>
Var Tape<Real>::add_rows(Var x, Var b) {
  const Node& nx = node(x);
  const Node& nb = node(b);
  if (nx.cols != nb.size()) {
    throw std::invalid_argument("Tape::add_rows: dimension mismatch");
  }
  Node n;
  n.op = Op::kAddRows;
  n.a = x.id;
  n.b = b.id;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.needs_grad = nx.needs_grad || nb.needs_grad;
  return push(n);
}

template <typename Real>
Var Tape<Real>::conv1d(Var signal, Var taps, ConvMode mode) {
  const Node& ns = node(signal);
  const Node& nt = node(taps);
  check_conv_args(ns.size(), nt.size(), mode);
  Node n;
  n.op = Op::kConv1d;
  n.a = signal.id;
  n.b = taps.id;
  n.rows = ns.size();
  n.cols = 1;
  n.aux = mode == ConvMode::kCausal ? Real(1) : Real(0);
  n.needs_grad = ns.needs_grad || nt.needs_grad;
  return push(n);
}

template <typename Real>
Var Tape<Real>::conv_bank(Var signal, Var filters, ConvMode mode) {
  const Node& ns = node(signal);
  const Node& nf = node(filters);
  check_conv_args(ns.size(), nf.cols, mode);
  Node n;
  n.op = Op::kConvBank;
  n.a = signal.id;
  n.b = filters.id;
  n.rows = ns.size();
  n.cols = nf.rows;
  n.aux = mode == ConvMode::kCausal ? Real(1) : Real(0);
  n.needs_grad = ns.needs_grad || nf.needs_grad;
  return push(n);
}

template <typename Real>
Var Tape<Real>::gaussian_mixture(Var w, Var z, Var mu, Var sigma,
                                 std::size_t length) {
  const std::size_t k = node(w).size();
  if (node(z).size() != k || node(mu).size() != k || node(sigma).size() != k) {
    throw std::invalid_argument("Tape::gaussian_mixture: component mismatch");
  }
  if (length == 0) {
    throw std::invalid_argument("Tape::gaussian_mixture: zero length");
  }
  const Real* s = val(sigma.id);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(s[i] > Real(0))) {
      throw std::domain_error("gaussian_mixture: sigma must be positive");
    }
  }
  Node n;
  n.op = Op::kGaussianMixture;
  n.a = w.id;
  n.b = z.id;
  n.c = mu.id;
  n.d = sigma.id;
  n.rows = length;
  n.cols = 1;
  n.needs_grad = grad_of(w.id) || grad_of(z.id) || grad_of(mu.id) ||
                 grad_of(sigma.id);
  return push(n);
}

template <typename Real>
Var Tape<Real>::concat(std::span<const Var> parts) {
  if (parts.empty()) {
    throw std::invalid_argument("Tape::concat: no operands");
  }
  Node n;
  n.op = Op::kConcat;
  n.extra = operands_.size();
  n.a = static_cast<std::uint32_t>(parts.size());
  n.cols = 1;
  for (Var p : parts) {
    const Node& np = node(p);
    n.rows += np.size();
    n.needs_grad = n.needs_grad || np.needs_grad;
    operands_.push_back(p.id);
  }
  return push(n);
}

template <typename Real>
Var Tape<Real>::slice(Var a, std::size_t offset, std::size_t length) {
  const Node& src = node(a);
  if (offset + length > src.size() || length == 0) {
    throw std::out_of_range("Tape::slice: range outside operand");
  }
  Node n;
  n.op = Op::kSlice;
  n.a = a.id;
  n.extra = offset;
  n.rows = length;
  n.cols = 1;
  n.needs_grad = src.needs_grad;
  return push(n);
}

template <typename Real>
Var Tape<Real>::reshape(Var a, std::size_t rows, std::size_t cols) {
  const Node& src = node(a);
  if (rows * cols != src.size()) {
    throw std::invalid_argument("Tape::reshape: size mismatch");
  }
  Node n;
  n.op = Op::kReshape;
  n.a = a.id;
  n.rows = rows;
  n.cols = cols;
  n.needs_grad = src.needs_grad;
  return push(n);
}

template <typename Real>
Var Tape<Real>::sum(Var a) {
  Node n;
  n.op = Op::kSum;
  n.a = a.id;
  n.rows = 1;
  n.cols = 1;
  n.needs_grad = node(a).needs_grad;
  return push(n);
}

template <typename Real>
Var Tape<Real>::dot(Var a, Var b) {
  require_same_size(a, b, "dot");
  Node n;
  n.op = Op::kDot;
  n.a = a.id;
  n.b = b.id;
  n.rows = 1;
  n.cols = 1;
  n.needs_grad = grad_of(a.id) || grad_of(b.id);
  return push(n);
}

template <typename Real>
Var Tape<Real>::sum_squares(Var a) {
  Node n;
  n.op = Op::kSumSquares;
  n.a = a.id;
  n.rows = 1;
  n.cols = 1;
  n.needs_grad = node(a).needs_grad;
  return push(n);
}

// ---------------------------------------------------------------------------

template <typename Real>
void Tape<Real>::evaluate(const Node& n) {
  Real* out = values_.data() + n.offset;
  const std::size_t size = n.size();
  switch (n.op) {
    case Op::kConstant:
    case Op::kInput:
    case Op::kParam:
      return;
    case Op::kAdd: {
      const Real* x = val(n.a);
      const Real* y = val(n.b);
      for (std::size_t i = 0; i < size; ++i) out[i] = x[i] + y[i];
      return;
    }
    case Op::kSub: {
      const Real* x = val(n.a);
      const Real* y = val(n.b);
      for (std::size_t i = 0; i < size; ++i) out[i] = x[i] - y[i];
      return;
    }
    case Op::kMul: {
      const Real* x = val(n.a);
      const Real* y = val(n.b);
      for (std::size_t i = 0; i < size; ++i) out[i] = x[i] * y[i];
      return;
    }
    case Op::kScale: {
      const Real* x = val(n.a);
      for (std::size_t i = 0; i < size; ++i) out[i] = x[i] * n.aux;
      return;
    }
    case Op::kShift: {
      const Real* x = val(n.a);
      for (std::size_t i = 0; i < size; ++i) out[i] = x[i] + n.aux;
      return;
    }
    case Op::kTanh: {
      const Real* x = val(n.a);
      for (std::size_t i = 0; i < size; ++i) out[i] = std::tanh(x[i]);
      return;
    }
    case Op::kSigmoid: {
      const Real* x = val(n.a);
      for (std::size_t i = 0; i < size; ++i) out[i] = locattn::sigmoid(x[i]);
      return;
    }
    case Op::kExp: {
      const Real* x = val(n.a);
      for (std::size_t i = 0; i < size; ++i) out[i] = std::exp(x[i]);
      return;
    }
    case Op::kSoftplus: {
      const Real* x = val(n.a);
      for (std::size_t i = 0; i < size; ++i) out[i] = locattn::softplus(x[i]);
      return;
    }
    case Op::kSqrt: {
      const Real* x = val(n.a);
      for (std::size_t i = 0; i < size; ++i) out[i] = std::sqrt(x[i]);
      return;
    }
    case Op::kLogFloor: {
      const Real* x = val(n.a);
      for (std::size_t i = 0; i < size; ++i) {
        out[i] = locattn::log_floor(x[i], n.aux);
      }
      return;
    }
    case Op::kSoftmax:
      softmax_into(std::span<const Real>(val(n.a), size),
                   std::span<Real>(out, size));
      return;
    case Op::kMatVec: {
      const Node& m = nodes_[n.a];
      const Real* w = val(n.a);
      const Real* x = val(n.b);
      for (std::size_t r = 0; r < m.rows; ++r) {
        const Real* row = w + r * m.cols;
        Real acc = 0;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
      }
      return;
    }
    case Op::kMatVecT: {
      const Node& m = nodes_[n.a];
      const Real* w = val(n.a);
      const Real* x = val(n.b);
      std::fill(out, out + size, Real(0));
      for (std::size_t r = 0; r < m.rows; ++r) {
        const Real* row = w + r * m.cols;
        const Real xr = x[r];
        for (std::size_t c = 0; c < m.cols; ++c) out[c] += row[c] * xr;
      }
      return;
    }
    case Op::kRowsMatVec: {
      const Node& m = nodes_[n.a];
      const Real* w = val(n.a);
      const Real* x = val(n.b);
      for (std::size_t l = 0; l < n.rows; ++l) {
        const Real* xl = x + l * m.cols;
        Real* yl = out + l * m.rows;
        for (std::size_t r = 0; r < m.rows; ++r) {
          const Real* row = w + r * m.cols;
          Real acc = 0;
          for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * xl[c];
          yl[r] = acc;
        }
      }
      return;
    }
    case Op::kAddRows: {
      const Real* x = val(n.a);
      const Real* b = val(n.b);
      for (std::size_t l = 0; l < n.rows; ++l) {
        for (std::size_t c = 0; c < n.cols; ++c) {
          out[l * n.cols + c] = x[l * n.cols + c] + b[c];
        }
      }
      return;
    }
    case Op::kConv1d: {
      const ConvMode mode = n.aux != Real(0) ? ConvMode::kCausal
                                             : ConvMode::kCentered;
      conv1d_into(std::span<const Real>(val(n.a), nodes_[n.a].size()),
                  std::span<const Real>(val(n.b), nodes_[n.b].size()), mode,
                  out);
      return;
    }
    case Op::kConvBank: {
      const ConvMode mode = n.aux != Real(0) ? ConvMode::kCausal
                                             : ConvMode::kCentered;
      const Node& f = nodes_[n.b];
      for (std::size_t r = 0; r < f.rows; ++r) {
        conv1d_into(std::span<const Real>(val(n.a), n.rows),
                    std::span<const Real>(val(n.b) + r * f.cols, f.cols), mode,
                    out + r, f.rows);
      }
      return;
    }
    case Op::kGaussianMixture: {
      const std::size_t k = nodes_[n.a].size();
      const Real* w = val(n.a);
      const Real* z = val(n.b);
      const Real* mu = val(n.c);
      const Real* sg = val(n.d);
      std::fill(out, out + size, Real(0));
      for (std::size_t i = 0; i < k; ++i) {
        const Real coef = w[i] / z[i];
        const Real inv = Real(1) / (Real(2) * sg[i] * sg[i]);
        for (std::size_t j = 0; j < size; ++j) {
          const Real d = static_cast<Real>(j) - mu[i];
          out[j] += coef * std::exp(-d * d * inv);
        }
      }
      return;
    }
    case Op::kConcat: {
      std::size_t pos = 0;
      for (std::size_t i = 0; i < n.a; ++i) {
        const std::uint32_t id = operands_[n.extra + i];
        const std::size_t len = nodes_[id].size();
        std::copy(val(id), val(id) + len, out + pos);
        pos += len;
      }
      return;
    }
    case Op::kSlice: {
      const Real* x = val(n.a) + n.extra;
      std::copy(x, x + size, out);
      return;
    }
    case Op::kReshape: {
      const Real* x = val(n.a);
      std::copy(x, x + size, out);
      return;
    }
    case Op::kSum: {
      const Real* x = val(n.a);
      Real acc = 0;
      for (std::size_t i = 0; i < nodes_[n.a].size(); ++i) acc += x[i];
      out[0] = acc;
      return;
    }
    case Op::kDot: {
      const Real* x = val(n.a);
      const Real* y = val(n.b);
      Real acc = 0;
      for (std::size_t i = 0; i < nodes_[n.a].size(); ++i) acc += x[i] * y[i];
      out[0] = acc;
      return;
    }
    case Op::kSumSquares: {
      const Real* x = val(n.a);
      Real acc = 0;
      for (std::size_t i = 0; i < nodes_[n.a].size(); ++i) acc += x[i] * x[i];
      out[0] = acc;
      return;
    }
  }
}

template <typename Real>
void Tape<Real>::propagate(const Node& n) {
  const Real* g = grads_.data() + n.offset;
  const Real* out = values_.data() + n.offset;
  const std::size_t size = n.size();
  switch (n.op) {
    case Op::kConstant:
    case Op::kInput:
    case Op::kParam:
      return;
    case Op::kAdd:
      if (grad_of(n.a)) {
        Real* ga = grd(n.a);
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i];
      }
      if (grad_of(n.b)) {
        Real* gb = grd(n.b);
        for (std::size_t i = 0; i < size; ++i) gb[i] += g[i];
      }
      return;
    case Op::kSub:
      if (grad_of(n.a)) {
        Real* ga = grd(n.a);
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i];
      }
      if (grad_of(n.b)) {
        Real* gb = grd(n.b);
        for (std::size_t i = 0; i < size; ++i) gb[i] -= g[i];
      }
      return;
    case Op::kMul: {
      const Real* x = val(n.a);
      const Real* y = val(n.b);
      if (grad_of(n.a)) {
        Real* ga = grd(n.a);
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * y[i];
      }
      if (grad_of(n.b)) {
        Real* gb = grd(n.b);
        for (std::size_t i = 0; i < size; ++i) gb[i] += g[i] * x[i];
      }
      return;
    }
    case Op::kScale: {
      Real* ga = grd(n.a);
      for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * n.aux;
      return;
    }
    case Op::kShift:
    case Op::kReshape: {
      Real* ga = grd(n.a);
      for (std::size_t i = 0; i < size; ++i) ga[i] += g[i];
      return;
    }
    case Op::kTanh: {
      Real* ga = grd(n.a);
      for (std::size_t i = 0; i < size; ++i) {
        ga[i] += g[i] * (Real(1) - out[i] * out[i]);
      }
      return;
    }
    case Op::kSigmoid: {
      Real* ga = grd(n.a);
      for (std::size_t i = 0; i < size; ++i) {
        ga[i] += g[i] * out[i] * (Real(1) - out[i]);
      }
      return;
    }
    case Op::kExp: {
      Real* ga = grd(n.a);
      for (std::size_t i = 0; i < size; ++i) ga[i] += g[i] * out[i];
      return;
    }
    case Op::kSoftplus: {
      const Real* x = val(n.a);
      Real* ga = grd(n.a);
      for (std::size_t i = 0; i < size; ++i) {
        ga[i] += g[i] * locattn::sigmoid(x[i]);
      }
      return;
    }
    case Op::kSqrt: {
      Real* ga = grd(n.a);
      for (std::size_t i = 0; i < size; ++i) {
        ga[i] += g[i] / (Real(2) * out[i]);
      }
      return;
    }
    case Op::kLogFloor: {
      const Real* x = val(n.a);
      Real* ga = grd(n.a);
      for (std::size_t i = 0; i < size; ++i) {
        if (x[i] > Real(0) && out[i] > n.aux) {
          ga[i] += g[i] / x[i];
        }
      }
      return;
    }
    case Op::kSoftmax: {
      Real inner = 0;
      for (std::size_t i = 0; i < size; ++i) inner += g[i] * out[i];
      Real* ga = grd(n.a);
      for (std::size_t i = 0; i < size; ++i) {
        ga[i] += out[i] * (g[i] - inner);
      }
      return;
    }
    case Op::kMatVec: {
      const Node& m = nodes_[n.a];
      const Real* w = val(n.a);
      const Real* x = val(n.b);
      if (grad_of(n.a)) {
        Real* gw = grd(n.a);
        for (std::size_t r = 0; r < m.rows; ++r) {
          Real* row = gw + r * m.cols;
          const Real gr = g[r];
          for (std::size_t c = 0; c < m.cols; ++c) row[c] += gr * x[c];
        }
      }
      if (grad_of(n.b)) {
        Real* gx = grd(n.b);
        for (std::size_t r = 0; r < m.rows; ++r) {
          const Real* row = w + r * m.cols;
          const Real gr = g[r];
          for (std::size_t c = 0; c < m.cols; ++c) gx[c] += row[c] * gr;
        }
      }
      return;
    }
    case Op::kMatVecT: {
      const Node& m = nodes_[n.a];
      const Real* w = val(n.a);
      const Real* x = val(n.b);
      if (grad_of(n.a)) {
        Real* gw = grd(n.a);
        for (std::size_t r = 0; r < m.rows; ++r) {
          Real* row = gw + r * m.cols;
          const Real xr = x[r];
          for (std::size_t c = 0; c < m.cols; ++c) row[c] += xr * g[c];
        }
      }
      if (grad_of(n.b)) {
        Real* gx = grd(n.b);
        for (std::size_t r = 0; r < m.rows; ++r) {
          const Real* row = w + r * m.cols;
          Real acc = 0;
          for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * g[c];
          gx[r] += acc;
        }
      }
      return;
    }
    case Op::kRowsMatVec: {
      const Node& m = nodes_[n.a];
      const Real* w = val(n.a);
      const Real* x = val(n.b);
      const bool gw_needed = grad_of(n.a);
      const bool gx_needed = grad_of(n.b);
      Real* gw = gw_needed ? grd(n.a) : nullptr;
      Real* gx = gx_needed ? grd(n.b) : nullptr;
      for (std::size_t l = 0; l < n.rows; ++l) {
        const Real* xl = x + l * m.cols;
        const Real* gl = g + l * m.rows;
        for (std::size_t r = 0; r < m.rows; ++r) {
          const Real gr = gl[r];
          if (gr == Real(0)) continue;
          if (gw_needed) {
            Real* row = gw + r * m.cols;
            for (std::size_t c = 0; c < m.cols; ++c) row[c] += gr * xl[c];
          }
          if (gx_needed) {
            const Real* row = w + r * m.cols;
            Real* gxl = gx + l * m.cols;
            for (std::size_t c = 0; c < m.cols; ++c) gxl[c] += row[c] * gr;
          }
        }
      }
      return;
    }
    case Op::kAddRows: {
      if (grad_of(n.a)) {
        Real* ga = grd(n.a);
        for (std::size_t i = 0; i < size; ++i) ga[i] += g[i];
      }
      if (grad_of(n.b)) {
        Real* gb = grd(n.b);
        for (std::size_t l = 0; l < n.rows; ++l) {
          for (std::size_t c = 0; c < n.cols; ++c) gb[c] += g[l * n.cols + c];
        }
      }
      return;
    }
    case Op::kConv1d:
    case Op::kConvBank: {
      const ConvMode mode = n.aux != Real(0) ? ConvMode::kCausal
                                             : ConvMode::kCentered;
      const Node& f = nodes_[n.b];
      const std::size_t banks = n.op == Op::kConv1d ? 1 : f.rows;
      const std::size_t width = n.op == Op::kConv1d ? f.size() : f.cols;
      const auto len = static_cast<std::ptrdiff_t>(n.rows);
      const std::ptrdiff_t sh = conv_shift(width, mode);
      const Real* x = val(n.a);
      const Real* taps = val(n.b);
      Real* gx = grad_of(n.a) ? grd(n.a) : nullptr;
      Real* gt = grad_of(n.b) ? grd(n.b) : nullptr;
      for (std::size_t r = 0; r < banks; ++r) {
        const Real* t = taps + r * width;
        for (std::ptrdiff_t j = 0; j < len; ++j) {
          const Real gj = g[j * static_cast<std::ptrdiff_t>(banks) + r];
          if (gj == Real(0)) continue;
          const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, j + sh - len + 1);
          const std::ptrdiff_t k_hi = std::min<std::ptrdiff_t>(
              static_cast<std::ptrdiff_t>(width) - 1, j + sh);
          for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) {
            const std::ptrdiff_t src = j - k + sh;
            if (gx) gx[src] += t[k] * gj;
            if (gt) gt[r * width + k] += x[src] * gj;
          }
        }
      }
      return;
    }
    case Op::kGaussianMixture: {
      const std::size_t k = nodes_[n.a].size();
      const Real* w = val(n.a);
      const Real* z = val(n.b);
      const Real* mu = val(n.c);
      const Real* sg = val(n.d);
      Real* gw = grad_of(n.a) ? grd(n.a) : nullptr;
      Real* gz = grad_of(n.b) ? grd(n.b) : nullptr;
      Real* gm = grad_of(n.c) ? grd(n.c) : nullptr;
      Real* gs = grad_of(n.d) ? grd(n.d) : nullptr;
      for (std::size_t i = 0; i < k; ++i) {
        const Real var = sg[i] * sg[i];
        const Real inv = Real(1) / (Real(2) * var);
        const Real coef = w[i] / z[i];
        Real sum_e = 0;
        Real sum_d = 0;
        Real sum_d2 = 0;
        for (std::size_t j = 0; j < size; ++j) {
          const Real d = static_cast<Real>(j) - mu[i];
          const Real e = std::exp(-d * d * inv) * g[j];
          sum_e += e;
          sum_d += e * d;
          sum_d2 += e * d * d;
        }
        if (gw) gw[i] += sum_e / z[i];
        if (gz) gz[i] -= coef * sum_e / z[i];
        if (gm) gm[i] += coef * sum_d / var;
        if (gs) gs[i] += coef * sum_d2 / (var * sg[i]);
      }
      return;
    }
    case Op::kConcat: {
      std::size_t pos = 0;
      for (std::size_t i = 0; i < n.a; ++i) {
        const std::uint32_t id = operands_[n.extra + i];
        const std::size_t len = nodes_[id].size();
        if (grad_of(id)) {
          Real* gp = grd(id);
          for (std::size_t t = 0; t < len; ++t) gp[t] += g[pos + t];
        }
        pos += len;
      }
      return;
    }
    case Op::kSlice: {
      Real* ga = grd(n.a) + n.extra;
      for (std::size_t i = 0; i < size; ++i) ga[i] += g[i];
      return;
    }
    case Op::kSum: {
      Real* ga = grd(n.a);
      for (std::size_t i = 0; i < nodes_[n.a].size(); ++i) ga[i] += g[0];
      return;
    }
    case Op::kDot: {
      const Real* x = val(n.a);
      const Real* y = val(n.b);
      const std::size_t len = nodes_[n.a].size();
      if (grad_of(n.a)) {
        Real* ga = grd(n.a);
        for (std::size_t i = 0; i < len; ++i) ga[i] += g[0] * y[i];
      }
      if (grad_of(n.b)) {
        Real* gb = grd(n.b);
        for (std::size_t i = 0; i < len; ++i) gb[i] += g[0] * x[i];
      }
      return;
    }
    case Op::kSumSquares: {
      const Real* x = val(n.a);
      Real* ga = grd(n.a);
      for (std::size_t i = 0; i < nodes_[n.a].size(); ++i) {
        ga[i] += Real(2) * g[0] * x[i];
      }
      return;
    }
  }
}

template <typename Real>
void Tape<Real>::backward(Var loss) {
  const Node& root = node(loss);
  if (root.size() != 1) {
    throw std::invalid_argument("Tape::backward: loss must be a scalar");
  }
  grads_.assign(values_.size(), Real(0));
  grads_[root.offset] = Real(1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (n.needs_grad) {
      propagate(n);
    }
  }
  for (std::size_t i = 0; i <= loss.id; ++i) {
    const Node& n = nodes_[i];
    if (n.op != Op::kParam) continue;
    Parameter<Real>& p = *bound_[n.extra];
    const Real* g = grads_.data() + n.offset;
    for (std::size_t t = 0; t < n.size(); ++t) p.grad[t] += g[t];
  }
}

template <typename Real>
void Tape<Real>::replay() {
  for (const Node& n : nodes_) {
    evaluate(n);
  }
}

template <typename Real>
void Tape<Real>::rewind(Mark m) {
  if (m.nodes > nodes_.size()) {
    throw std::out_of_range("Tape::rewind: mark is ahead of the tape");
  }
  for (std::size_t i = m.nodes; i < nodes_.size(); ++i) {
    if (nodes_[i].op == Op::kParam) {
      param_cache_.erase(bound_[nodes_[i].extra]);
    }
  }
  std::size_t bound_keep = bound_.size();
  for (std::size_t i = m.nodes; i < nodes_.size(); ++i) {
    if (nodes_[i].op == Op::kParam) {
      bound_keep = std::min(bound_keep, nodes_[i].extra);
    }
  }
  bound_.resize(bound_keep);
  nodes_.resize(m.nodes);
  values_.resize(m.values);
  operands_.resize(m.operands);
  grads_.clear();
}

template <typename Real>
std::span<const Real> Tape<Real>::value(Var v) const {
  const Node& n = node(v);
  return {values_.data() + n.offset, n.size()};
}

template <typename Real>
Real Tape<Real>::scalar(Var v) const {
  const Node& n = node(v);
  if (n.size() != 1) {
    throw std::invalid_argument("Tape::scalar: not a scalar");
  }
  return values_[n.offset];
}

template <typename Real>
std::span<const Real> Tape<Real>::grad(Var v) const {
  const Node& n = node(v);
  if (grads_.size() < n.offset + n.size()) {
    throw std::logic_error("Tape::grad: backward() has not run");
  }
  return {grads_.data() + n.offset, n.size()};
}

template <typename Real>
Tensor<Real> Tape<Real>::tensor(Var v) const {
  const Node& n = node(v);
  auto data = value(v);
  Shape shape = n.cols == 1 ? Shape{n.rows} : Shape{n.rows, n.cols};
  return Tensor<Real>(std::move(shape),
                      std::vector<Real>(data.begin(), data.end()));
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace locattn
