// SPDX-License-Identifier: Apache-2.0
/**
 * @file   tape.hpp
 * @brief  Reverse-mode automatic differentiation over dense vectors.
 *
 * A Tape records primitive operations in execution order. Values live in one
 * contiguous arena; a Var is an index into the node list. backward() sweeps
 * the nodes in reverse, accumulating into the arena gradients and, for
 * parameter-reading nodes, directly into Tensor::grad.
 */
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "smartpaste/nn/tensor.hpp"

namespace smartpaste::nn {

struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
  friend bool operator==(Var, Var) = default;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Tape {
 public:
  Tape();

  void clear();
  std::size_t node_count() const { return nodes_.size(); }

  // -- leaves
  Var constant(std::span<const Real> values);
  Var zeros(std::size_t dim);
  /// Row `row` of a 2-D parameter (embedding lookup).
  Var row(Tensor& table, std::size_t row);
  /// A 1-D parameter used as a vector.
  Var vec(Tensor& param);

  // -- linear algebra
  /// w * x, w has shape [out, in].
  Var linear(Tensor& w, Var x);
  /// w * x + u * h + b. Any of u/h or b may be omitted (nullptr / invalid Var).
  Var affine(Tensor& w, Var x, Tensor* u, Var h, Tensor* b);
  Var dot(Var a, Var b);

  // -- element-wise
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, Real c);
  Var sigmoid(Var a);
  Var tanh(Var a);
  /// h + z * (candidate - h), the GRU state interpolation.
  Var mix(Var z, Var h, Var candidate);
  Var concat(Var a, Var b);

  // -- reductions over lists of equal-sized vectors
  /// Coordinate-wise maximum. Gradient flows to the argmax; ties go to the lowest index.
  Var max(std::span<const Var> xs);
  Var sum(std::span<const Var> xs);
  Var mean(std::span<const Var> xs);

  /// Softmax cross-entropy over a list of scalar scores. Result is the scalar loss.
  Var softmax_xent(std::span<const Var> scores, std::size_t truth);
  /// Probabilities recorded by a softmax_xent node.
  std::span<const Real> probs(Var xent) const;

  std::span<const Real> value(Var v) const;
  Real scalar(Var v) const { return value(v)[0]; }
  std::size_t dim(Var v) const { return nodes_.at(v.id).dim; }
  std::span<const Real> grad(Var v) const;

  /// Reverse sweep seeded with d(root)/d(root) = 1. root must be a scalar.
  void backward(Var root);

 private:
  enum class Op : std::uint8_t {
    Constant, Row, Vec, Linear, Affine, Dot, Add, Mul, Scale, Sigmoid, Tanh, Mix, Concat, Max, Sum,
    SoftmaxXent
  };
  struct Node {
    Op op;
    std::uint32_t dim;
    std::size_t off;
    std::int32_t a = -1, b = -1, c = -1;
    std::uint32_t list_off = 0, list_len = 0;
    Tensor* p0 = nullptr;
    Tensor* p1 = nullptr;
    Tensor* p2 = nullptr;
    std::size_t aux = 0;  // row index, truth index, or probs offset
    Real scalar = 0;
  };

  Var push(Node node, std::size_t extra = 0);
  const Node& node(Var v) const;
  std::size_t check_list(std::span<const Var> xs) const;
  Real* val(std::size_t off) { return values_.data() + off; }
  const Real* val(std::size_t off) const { return values_.data() + off; }

  std::vector<Node> nodes_;
  std::vector<Real> values_;
  std::vector<Real> grads_;
  std::vector<std::int32_t> lists_;
  std::vector<std::uint32_t> argmax_;
};

}  // namespace smartpaste::nn
