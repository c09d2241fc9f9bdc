// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "json.hpp"

#include "smartpaste/nn/tensor.hpp"

namespace smartpaste::nn {

inline constexpr int kCheckpointFormatVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"name": {"shape": [...], "data": [...]}, ...}; doubles are written with
/// round-trip precision so save/load is bit-exact.
nlohmann::json params_to_json(const ParamStore& params);

/// Overwrites values of tensors in `params` from `j`. Every tensor in `params`
/// must be present with the same shape.
void params_from_json(const nlohmann::json& j, ParamStore& params);

}  // namespace smartpaste::nn
