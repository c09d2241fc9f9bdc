// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace smartpaste::models {

/// Usage representations.
///   Loc    - type embedding only
///   AvgG   - type embedding plus the mean context over the lexical chains
///   GruG   - two sequence GRUs over the lexical chains
///   GruD   - two tree GRUs over the unrolled data-flow relations
///   Hybrid - linear combination of AvgG and GruD
enum class Variant { Loc, AvgG, GruG, GruD, Hybrid };

enum class ContextEncoder { LogBilinear, Gru };

class VariantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Variant variant_from_string(std::string_view s);
std::string_view to_string(Variant v);
ContextEncoder encoder_from_string(std::string_view s);
std::string_view to_string(ContextEncoder e);

struct ModelConfig {
  Variant variant = Variant::Hybrid;
  ContextEncoder encoder = ContextEncoder::LogBilinear;
  int hidden = 64;  // H
  int embed = 64;   // E; must equal H (type embeddings seed the usage GRU states)
  int window = 3;   // C
  int chain = 14;   // L
  int depth = 15;   // D
  bool use_types = true;
  int min_lexeme_count = 2;

  /// Throws std::invalid_argument on inconsistent sizes.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace smartpaste::models
