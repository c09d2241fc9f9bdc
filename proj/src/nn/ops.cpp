// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smartpaste/nn/tape.hpp"

namespace smartpaste::nn {

std::vector<Real> softmax(std::span<const Real> scores) {
  if (scores.empty()) return {};
  const Real m = *std::max_element(scores.begin(), scores.end());
  std::vector<Real> p(scores.size());
  Real z = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) z += p[i] = std::exp(scores[i] - m);
  for (auto& x : p) x /= z;
  return p;
}

XentResult softmax_xent(std::span<const Real> scores, std::size_t truth) {
  if (truth >= scores.size()) throw std::out_of_range("softmax_xent: truth index out of range");
  const Real m = *std::max_element(scores.begin(), scores.end());
  Real z = 0;
  for (Real s : scores) z += std::exp(s - m);
  return {-(scores[truth] - m - std::log(z)), softmax(scores)};
}

std::vector<Real> elementwise_max(std::span<const std::vector<Real>> xs) {
  if (xs.empty()) throw EmptyInput("elementwise_max of an empty list");
  std::vector<Real> out = xs[0];
  for (const auto& x : xs.subspan(1)) {
    if (x.size() != out.size()) throw ShapeError("elementwise_max: ragged input");
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(out[i], x[i]);
  }
  return out;
}

}  // namespace smartpaste::nn
