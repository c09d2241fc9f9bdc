// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/models/config.hpp"

namespace smartpaste::models {

Variant variant_from_string(std::string_view s) {
  if (s == "loc") return Variant::Loc;
  if (s == "avgg") return Variant::AvgG;
  if (s == "grug") return Variant::GruG;
  if (s == "grud") return Variant::GruD;
  if (s == "hybrid") return Variant::Hybrid;
  throw VariantError("unknown variant '" + std::string(s) + "' (expected loc|avgg|grug|grud|hybrid)");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Loc: return "loc";
    case Variant::AvgG: return "avgg";
    case Variant::GruG: return "grug";
    case Variant::GruD: return "grud";
    case Variant::Hybrid: return "hybrid";
  }
  return "?";
}

ContextEncoder encoder_from_string(std::string_view s) {
  if (s == "logbilinear") return ContextEncoder::LogBilinear;
  if (s == "gru") return ContextEncoder::Gru;
  throw std::invalid_argument("unknown context encoder '" + std::string(s) + "' (expected logbilinear|gru)");
}

std::string_view to_string(ContextEncoder e) { return e == ContextEncoder::Gru ? "gru" : "logbilinear"; }

void ModelConfig::validate() const {
  if (hidden <= 0 || embed <= 0) throw std::invalid_argument("hidden and embed sizes must be positive");
  if (hidden != embed) throw std::invalid_argument("embed size must equal hidden size");
  if (window < 1) throw std::invalid_argument("context window must be at least 1");
  if (chain < 0 || depth < 0) throw std::invalid_argument("chain length and tree depth must be non-negative");
  if (min_lexeme_count < 1) throw std::invalid_argument("min lexeme count must be at least 1");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"variant", to_string(c.variant)}, {"context_encoder", to_string(c.encoder)},
          {"hidden", c.hidden},             {"embed", c.embed},
          {"window", c.window},             {"chain", c.chain},
          {"depth", c.depth},               {"use_types", c.use_types},
          {"min_lexeme_count", c.min_lexeme_count}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.variant = variant_from_string(j.at("variant").get<std::string>());
  c.encoder = encoder_from_string(j.at("context_encoder").get<std::string>());
  c.hidden = j.at("hidden").get<int>();
  c.embed = j.at("embed").get<int>();
  c.window = j.at("window").get<int>();
  c.chain = j.at("chain").get<int>();
  c.depth = j.at("depth").get<int>();
  c.use_types = j.at("use_types").get<bool>();
  c.min_lexeme_count = j.value("min_lexeme_count", 2);
  c.validate();
  return c;
}

}  // namespace smartpaste::models
