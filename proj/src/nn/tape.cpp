// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "smartpaste/nn/kernels.hpp"

namespace smartpaste::nn {

namespace {

const kernels::KernelTable& K() { return kernels::active(); }

void require(bool ok, const char* what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace

Tape::Tape() {
  nodes_.reserve(1024);
  values_.reserve(1 << 16);
}

void Tape::clear() {
  nodes_.clear();
  values_.clear();
  grads_.clear();
  lists_.clear();
  argmax_.clear();
}

Var Tape::push(Node n, std::size_t extra) {
  n.off = values_.size();
  values_.resize(values_.size() + n.dim + extra, 0);
  nodes_.push_back(n);
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
    throw std::out_of_range("invalid tape variable");
  return nodes_[v.id];
}

std::span<const Real> Tape::value(Var v) const {
  const Node& n = node(v);
  return {val(n.off), n.dim};
}

std::span<const Real> Tape::grad(Var v) const {
  const Node& n = node(v);
  if (grads_.size() < values_.size()) return {};
  return {grads_.data() + n.off, n.dim};
}

Var Tape::constant(std::span<const Real> values) {
  Var v = push(Node{Op::Constant, static_cast<std::uint32_t>(values.size()), 0});
  std::copy(values.begin(), values.end(), val(nodes_[v.id].off));
  return v;
}

Var Tape::zeros(std::size_t dim) { return push(Node{Op::Constant, static_cast<std::uint32_t>(dim), 0}); }

Var Tape::row(Tensor& table, std::size_t r) {
  require(table.shape.size() == 2 && r < table.rows(), "row lookup out of range");
  Node n{Op::Row, static_cast<std::uint32_t>(table.cols()), 0};
  n.p0 = &table;
  n.aux = r;
  Var v = push(n);
  auto src = table.row(r);
  std::copy(src.begin(), src.end(), val(nodes_[v.id].off));
  return v;
}

Var Tape::vec(Tensor& param) {
  Node n{Op::Vec, static_cast<std::uint32_t>(param.size()), 0};
  n.p0 = &param;
  Var v = push(n);
  std::copy(param.data.begin(), param.data.end(), val(nodes_[v.id].off));
  return v;
}

Var Tape::linear(Tensor& w, Var x) {
  require(w.shape.size() == 2 && w.cols() == dim(x), "linear: input size mismatch");
  Node n{Op::Linear, static_cast<std::uint32_t>(w.rows()), 0};
  n.p0 = &w;
  n.a = x.id;
  Var v = push(n);
  const Node& nx = nodes_[x.id];
  K().gemv(w.data.data(), w.rows(), w.cols(), val(nx.off), val(nodes_[v.id].off));
  return v;
}

Var Tape::affine(Tensor& w, Var x, Tensor* u, Var h, Tensor* b) {
  require(w.shape.size() == 2 && w.cols() == dim(x), "affine: input size mismatch");
  const std::size_t out = w.rows();
  if (u != nullptr) require(h.valid() && u->rows() == out && u->cols() == dim(h), "affine: state size mismatch");
  if (b != nullptr) require(b->size() == out, "affine: bias size mismatch");
  Node n{Op::Affine, static_cast<std::uint32_t>(out), 0};
  n.p0 = &w;
  n.p1 = u;
  n.p2 = b;
  n.a = x.id;
  n.b = u != nullptr ? h.id : -1;
  Var v = push(n);
  Real* y = val(nodes_[v.id].off);
  if (b != nullptr) std::copy(b->data.begin(), b->data.end(), y);
  K().gemv(w.data.data(), out, w.cols(), val(nodes_[x.id].off), y);
  if (u != nullptr) K().gemv(u->data.data(), out, u->cols(), val(nodes_[h.id].off), y);
  return v;
}

Var Tape::dot(Var a, Var b) {
  require(dim(a) == dim(b), "dot: size mismatch");
  Node n{Op::Dot, 1, 0};
  n.a = a.id;
  n.b = b.id;
  Var v = push(n);
  *val(nodes_[v.id].off) = K().dot(val(nodes_[a.id].off), val(nodes_[b.id].off), dim(a));
  return v;
}

Var Tape::add(Var a, Var b) {
  require(dim(a) == dim(b), "add: size mismatch");
  Node n{Op::Add, static_cast<std::uint32_t>(dim(a)), 0};
  n.a = a.id;
  n.b = b.id;
  Var v = push(n);
  const Real* x = val(nodes_[a.id].off);
  const Real* y = val(nodes_[b.id].off);
  Real* o = val(nodes_[v.id].off);
  for (std::size_t i = 0; i < n.dim; ++i) o[i] = x[i] + y[i];
  return v;
}

Var Tape::mul(Var a, Var b) {
  require(dim(a) == dim(b), "mul: size mismatch");
  Node n{Op::Mul, static_cast<std::uint32_t>(dim(a)), 0};
  n.a = a.id;
  n.b = b.id;
  Var v = push(n);
  const Real* x = val(nodes_[a.id].off);
  const Real* y = val(nodes_[b.id].off);
  Real* o = val(nodes_[v.id].off);
  for (std::size_t i = 0; i < n.dim; ++i) o[i] = x[i] * y[i];
  return v;
}

Var Tape::scale(Var a, Real c) {
  Node n{Op::Scale, static_cast<std::uint32_t>(dim(a)), 0};
  n.a = a.id;
  n.scalar = c;
  Var v = push(n);
  const Real* x = val(nodes_[a.id].off);
  Real* o = val(nodes_[v.id].off);
  for (std::size_t i = 0; i < n.dim; ++i) o[i] = c * x[i];
  return v;
}

Var Tape::sigmoid(Var a) {
  Node n{Op::Sigmoid, static_cast<std::uint32_t>(dim(a)), 0};
  n.a = a.id;
  Var v = push(n);
  const Real* x = val(nodes_[a.id].off);
  Real* o = val(nodes_[v.id].off);
  for (std::size_t i = 0; i < n.dim; ++i) o[i] = 1 / (1 + std::exp(-x[i]));
  return v;
}

Var Tape::tanh(Var a) {
  Node n{Op::Tanh, static_cast<std::uint32_t>(dim(a)), 0};
  n.a = a.id;
  Var v = push(n);
  const Real* x = val(nodes_[a.id].off);
  Real* o = val(nodes_[v.id].off);
  for (std::size_t i = 0; i < n.dim; ++i) o[i] = std::tanh(x[i]);
  return v;
}

Var Tape::mix(Var z, Var h, Var candidate) {
  require(dim(z) == dim(h) && dim(h) == dim(candidate), "mix: size mismatch");
  Node n{Op::Mix, static_cast<std::uint32_t>(dim(z)), 0};
  n.a = z.id;
  n.b = h.id;
  n.c = candidate.id;
  Var v = push(n);
  const Real* zz = val(nodes_[z.id].off);
  const Real* hh = val(nodes_[h.id].off);
  const Real* cc = val(nodes_[candidate.id].off);
  Real* o = val(nodes_[v.id].off);
  for (std::size_t i = 0; i < n.dim; ++i) o[i] = (1 - zz[i]) * hh[i] + zz[i] * cc[i];
  return v;
}

Var Tape::concat(Var a, Var b) {
  const std::size_t da = dim(a), db = dim(b);
  Node n{Op::Concat, static_cast<std::uint32_t>(da + db), 0};
  n.a = a.id;
  n.b = b.id;
  Var v = push(n);
  Real* o = val(nodes_[v.id].off);
  std::copy_n(val(nodes_[a.id].off), da, o);
  std::copy_n(val(nodes_[b.id].off), db, o + da);
  return v;
}

std::size_t Tape::check_list(std::span<const Var> xs) const {
  if (xs.empty()) throw EmptyInput("reduction over an empty list");
  const std::size_t d = dim(xs[0]);
  for (Var x : xs) require(dim(x) == d, "reduction: size mismatch");
  return d;
}

Var Tape::max(std::span<const Var> xs) {
  const std::size_t d = check_list(xs);
  Node n{Op::Max, static_cast<std::uint32_t>(d), 0};
  n.list_off = static_cast<std::uint32_t>(lists_.size());
  n.list_len = static_cast<std::uint32_t>(xs.size());
  for (Var x : xs) lists_.push_back(x.id);
  n.aux = argmax_.size();
  argmax_.resize(argmax_.size() + d, 0);
  Var v = push(n);
  Real* o = val(nodes_[v.id].off);
  std::copy_n(val(nodes_[xs[0].id].off), d, o);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const Real* x = val(nodes_[xs[k].id].off);
    for (std::size_t i = 0; i < d; ++i) {
      if (x[i] > o[i]) {  // strict: ties keep the lowest index
        o[i] = x[i];
        argmax_[n.aux + i] = static_cast<std::uint32_t>(k);
      }
    }
  }
  return v;
}

Var Tape::sum(std::span<const Var> xs) {
  const std::size_t d = check_list(xs);
  Node n{Op::Sum, static_cast<std::uint32_t>(d), 0};
  n.list_off = static_cast<std::uint32_t>(lists_.size());
  n.list_len = static_cast<std::uint32_t>(xs.size());
  for (Var x : xs) lists_.push_back(x.id);
  Var v = push(n);
  Real* o = val(nodes_[v.id].off);
  for (Var x : xs) K().axpy(1.0, val(nodes_[x.id].off), o, d);
  return v;
}

Var Tape::mean(std::span<const Var> xs) {
  Var s = sum(xs);
  return scale(s, 1.0 / static_cast<Real>(xs.size()));
}

Var Tape::softmax_xent(std::span<const Var> scores, std::size_t truth) {
  if (scores.empty()) throw EmptyInput("softmax over no scores");
  if (truth >= scores.size()) throw std::out_of_range("softmax truth index out of range");
  for (Var s : scores) require(dim(s) == 1, "softmax: scores must be scalars");
  Node n{Op::SoftmaxXent, 1, 0};
  n.list_off = static_cast<std::uint32_t>(lists_.size());
  n.list_len = static_cast<std::uint32_t>(scores.size());
  for (Var s : scores) lists_.push_back(s.id);
  n.aux = truth;
  Var v = push(n, scores.size());
  const std::size_t off = nodes_[v.id].off;
  Real m = -std::numeric_limits<Real>::infinity();
  for (Var s : scores) m = std::max(m, *val(nodes_[s.id].off));
  Real z = 0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const Real e = std::exp(*val(nodes_[scores[k].id].off) - m);
    values_[off + 1 + k] = e;
    z += e;
  }
  for (std::size_t k = 0; k < scores.size(); ++k) values_[off + 1 + k] /= z;
  values_[off] = -(*val(nodes_[scores[truth].id].off) - m - std::log(z));
  return v;
}

std::span<const Real> Tape::probs(Var xent) const {
  const Node& n = node(xent);
  if (n.op != Op::SoftmaxXent) throw std::invalid_argument("probs() on a non-softmax node");
  return {val(n.off + 1), n.list_len};
}

void Tape::backward(Var root) {
  const Node& rn = node(root);
  require(rn.dim == 1, "backward: root must be scalar");
  grads_.assign(values_.size(), 0);
  grads_[rn.off] = 1;
  const auto& k = K();
  for (std::int32_t id = root.id; id >= 0; --id) {
    const Node& n = nodes_[id];
    const Real* g = grads_.data() + n.off;
    bool any = false;
    for (std::size_t i = 0; i < n.dim; ++i) {
      if (g[i] != 0) {
        any = true;
        break;
      }
    }
    if (!any) continue;
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Row:
        k.axpy(1.0, g, n.p0->grad.data() + n.aux * n.p0->cols(), n.dim);
        break;
      case Op::Vec:
        k.axpy(1.0, g, n.p0->grad.data(), n.dim);
        break;
      case Op::Linear: {
        const Node& x = nodes_[n.a];
        k.ger(n.p0->grad.data(), n.p0->rows(), n.p0->cols(), g, val(x.off));
        k.gemv_t(n.p0->data.data(), n.p0->rows(), n.p0->cols(), g, grads_.data() + x.off);
        break;
      }
      case Op::Affine: {
        const Node& x = nodes_[n.a];
        k.ger(n.p0->grad.data(), n.p0->rows(), n.p0->cols(), g, val(x.off));
        k.gemv_t(n.p0->data.data(), n.p0->rows(), n.p0->cols(), g, grads_.data() + x.off);
        if (n.p1 != nullptr) {
          const Node& h = nodes_[n.b];
          k.ger(n.p1->grad.data(), n.p1->rows(), n.p1->cols(), g, val(h.off));
          k.gemv_t(n.p1->data.data(), n.p1->rows(), n.p1->cols(), g, grads_.data() + h.off);
        }
        if (n.p2 != nullptr) k.axpy(1.0, g, n.p2->grad.data(), n.dim);
        break;
      }
      case Op::Dot: {
        const Node& a = nodes_[n.a];
        const Node& b = nodes_[n.b];
        k.axpy(g[0], val(b.off), grads_.data() + a.off, a.dim);
        k.axpy(g[0], val(a.off), grads_.data() + b.off, b.dim);
        break;
      }
      case Op::Add: {
        k.axpy(1.0, g, grads_.data() + nodes_[n.a].off, n.dim);
        k.axpy(1.0, g, grads_.data() + nodes_[n.b].off, n.dim);
        break;
      }
      case Op::Mul: {
        const Node& a = nodes_[n.a];
        const Node& b = nodes_[n.b];
        Real* ga = grads_.data() + a.off;
        Real* gb = grads_.data() + b.off;
        const Real* va = val(a.off);
        const Real* vb = val(b.off);
        for (std::size_t i = 0; i < n.dim; ++i) {
          ga[i] += g[i] * vb[i];
          gb[i] += g[i] * va[i];
        }
        break;
      }
      case Op::Scale:
        k.axpy(n.scalar, g, grads_.data() + nodes_[n.a].off, n.dim);
        break;
      case Op::Sigmoid: {
        Real* ga = grads_.data() + nodes_[n.a].off;
        const Real* y = val(n.off);
        for (std::size_t i = 0; i < n.dim; ++i) ga[i] += g[i] * y[i] * (1 - y[i]);
        break;
      }
      case Op::Tanh: {
        Real* ga = grads_.data() + nodes_[n.a].off;
        const Real* y = val(n.off);
        for (std::size_t i = 0; i < n.dim; ++i) ga[i] += g[i] * (1 - y[i] * y[i]);
        break;
      }
      case Op::Mix: {
        const Node& z = nodes_[n.a];
        const Node& h = nodes_[n.b];
        const Node& c = nodes_[n.c];
        Real* gz = grads_.data() + z.off;
        Real* gh = grads_.data() + h.off;
        Real* gc = grads_.data() + c.off;
        const Real* vz = val(z.off);
        const Real* vh = val(h.off);
        const Real* vc = val(c.off);
        for (std::size_t i = 0; i < n.dim; ++i) {
          gz[i] += g[i] * (vc[i] - vh[i]);
          gh[i] += g[i] * (1 - vz[i]);
          gc[i] += g[i] * vz[i];
        }
        break;
      }
      case Op::Concat: {
        const Node& a = nodes_[n.a];
        const Node& b = nodes_[n.b];
        k.axpy(1.0, g, grads_.data() + a.off, a.dim);
        k.axpy(1.0, g + a.dim, grads_.data() + b.off, b.dim);
        break;
      }
      case Op::Max: {
        for (std::size_t i = 0; i < n.dim; ++i) {
          const std::int32_t src = lists_[n.list_off + argmax_[n.aux + i]];
          grads_[nodes_[src].off + i] += g[i];
        }
        break;
      }
      case Op::Sum: {
        for (std::uint32_t j = 0; j < n.list_len; ++j)
          k.axpy(1.0, g, grads_.data() + nodes_[lists_[n.list_off + j]].off, n.dim);
        break;
      }
      case Op::SoftmaxXent: {
        for (std::uint32_t j = 0; j < n.list_len; ++j) {
          const Real p = values_[n.off + 1 + j];
          const Real d = p - (j == n.aux ? 1.0 : 0.0);
          grads_[nodes_[lists_[n.list_off + j]].off] += g[0] * d;
        }
        break;
      }
    }
  }
}

}  // namespace smartpaste::nn
