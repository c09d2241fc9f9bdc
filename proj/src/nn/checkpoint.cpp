// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/nn/checkpoint.hpp"

namespace smartpaste::nn {

nlohmann::json params_to_json(const ParamStore& params) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& t = params.at(i);
    out[t.name] = {{"shape", t.shape}, {"data", t.data}};
  }
  return out;
}

void params_from_json(const nlohmann::json& j, ParamStore& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& t = params.at(i);
    if (!j.contains(t.name)) throw CheckpointError("checkpoint is missing parameter " + t.name);
    const auto& e = j.at(t.name);
    if (e.at("shape").get<std::vector<std::size_t>>() != t.shape)
      throw CheckpointError("shape mismatch for parameter " + t.name);
    auto data = e.at("data").get<std::vector<Real>>();
    if (data.size() != t.size()) throw CheckpointError("size mismatch for parameter " + t.name);
    t.data = std::move(data);
  }
}

}  // namespace smartpaste::nn
