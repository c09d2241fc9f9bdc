// SPDX-License-Identifier: Apache-2.0
// Tape-free numeric helpers shared by inference and evaluation.
#pragma once

#include <span>
#include <vector>

#include "smartpaste/nn/tensor.hpp"

namespace smartpaste::nn {

/// Max-subtracted softmax.
std::vector<Real> softmax(std::span<const Real> scores);

struct XentResult {
  Real loss;
  std::vector<Real> probs;
};

/// Throws std::out_of_range (IndexError) when truth is not a valid index.
XentResult softmax_xent(std::span<const Real> scores, std::size_t truth);

/// Coordinate-wise maximum. Throws EmptyInput on an empty list, ShapeError on ragged input.
std::vector<Real> elementwise_max(std::span<const std::vector<Real>> xs);

}  // namespace smartpaste::nn
