// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "smartpaste/nn/tensor.hpp"

namespace smartpaste::nn {

struct AdamConfig {
  Real lr = 1e-3;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
};

/// First/second moment estimates for every tensor of a ParamStore.
struct AdamState {
  std::vector<std::vector<Real>> m;
  std::vector<std::vector<Real>> v;
  long step = 0;
};

AdamState adam_init(const ParamStore& params);

/// One bias-corrected adaptive-moment update using each tensor's grad buffer.
void adam_step(ParamStore& params, AdamState& state, const AdamConfig& cfg);

}  // namespace smartpaste::nn
