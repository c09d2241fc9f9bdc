// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "smartpaste/models/config.hpp"
#include "smartpaste/nn/gru.hpp"
#include "smartpaste/taskgen/instance.hpp"

namespace smartpaste::models {

/// Lexeme and type-name vocabularies.
class Vocab {
 public:
  static constexpr int kUnkToken = 0;
  static constexpr int kPad = 1;
  static constexpr int kPlaceholder = 2;
  static constexpr int kUnkType = 0;

  Vocab();
  /// Counts non-variable lexemes and every declared type name in `instances`.
  /// Lexemes seen fewer than `min_count` times map to kUnkToken.
  static Vocab build(const std::vector<taskgen::TaskInstance>& instances, int min_count);

  int lexeme(const std::string& text) const;
  int type(const std::string& name) const;
  std::size_t lexeme_count() const { return lexemes_.size(); }
  std::size_t type_count() const { return types_.size(); }
  const std::vector<std::string>& lexemes() const { return lexemes_; }
  const std::vector<std::string>& types() const { return types_; }

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

 private:
  void add_lexeme(const std::string& s);
  void add_type(const std::string& s);

  std::vector<std::string> lexemes_;
  std::map<std::string, int, std::less<>> lexeme_index_;
  std::vector<std::string> types_;
  std::map<std::string, int, std::less<>> type_index_;
};

/// Parameters of one usage model. Only the tensors the variant and context
/// encoder need are registered.
class Model {
 public:
  Model(ModelConfig config, Vocab vocab, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  // Bound tensors; null when unused by the configuration.
  nn::Tensor* type_embedding = nullptr;   // [types, E]
  nn::Tensor* token_embedding = nullptr;  // [lexemes, E]
  std::vector<nn::Tensor*> ctx_prev_a;    // C x [H, E] (log-bilinear)
  std::vector<nn::Tensor*> ctx_next_a;
  nn::GruCell ctx_prev_gru, ctx_next_gru;  // (gru context encoder)
  nn::Tensor* ctx_w = nullptr;             // [H, 2H]
  nn::GruCell lex_prev_gru, lex_next_gru;  // GruG
  nn::Tensor* lex_w = nullptr;
  nn::GruCell tree_prev_gru, tree_next_gru;  // GruD, Hybrid
  nn::Tensor* tree_w = nullptr;
  nn::Tensor* hybrid_w = nullptr;

  bool uses_lexical_gru() const { return config_.variant == Variant::GruG; }
  bool uses_tree() const { return config_.variant == Variant::GruD || config_.variant == Variant::Hybrid; }

 private:
  ModelConfig config_;
  Vocab vocab_;
  nn::ParamStore params_;
};

}  // namespace smartpaste::models
