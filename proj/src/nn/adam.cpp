// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/nn/adam.hpp"

#include <cmath>

namespace smartpaste::nn {

AdamState adam_init(const ParamStore& params) {
  AdamState s;
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m.emplace_back(params.at(i).size(), 0);
    s.v.emplace_back(params.at(i).size(), 0);
  }
  return s;
}

void adam_step(ParamStore& params, AdamState& state, const AdamConfig& cfg) {
  if (state.m.size() != params.size()) throw ShapeError("adam state does not match parameters");
  ++state.step;
  const Real c1 = 1 - std::pow(cfg.beta1, static_cast<Real>(state.step));
  const Real c2 = 1 - std::pow(cfg.beta2, static_cast<Real>(state.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& p = params.at(t);
    auto& m = state.m[t];
    auto& v = state.v[t];
    if (m.size() != p.size()) throw ShapeError("adam state does not match " + p.name);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Real g = p.grad[i];
      m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g * g;
      const Real mhat = m[i] / c1;
      const Real vhat = v[i] / c2;
      p.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace smartpaste::nn
