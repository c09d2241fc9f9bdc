// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/models/model.hpp"

#include <set>

namespace smartpaste::models {

Vocab::Vocab() {
  add_lexeme("<unk>");
  add_lexeme("<pad>");
  add_lexeme("<placeholder>");
  add_type("UnkType");
}

void Vocab::add_lexeme(const std::string& s) {
  if (lexeme_index_.emplace(s, static_cast<int>(lexemes_.size())).second) lexemes_.push_back(s);
}

void Vocab::add_type(const std::string& s) {
  if (type_index_.emplace(s, static_cast<int>(types_.size())).second) types_.push_back(s);
}

Vocab Vocab::build(const std::vector<taskgen::TaskInstance>& instances, int min_count) {
  Vocab v;
  std::map<std::string, int> counts;
  std::set<std::string> type_names;
  std::set<const minilang::TypedProgram*> seen_programs;
  std::set<std::string> seen_ids;
  for (const auto& inst : instances) {
    const auto* p = inst.program.get();
    // instances extracted from one file share a program; count each file once
    if (!seen_programs.insert(p).second || !seen_ids.insert(inst.program_id).second) continue;
    for (const auto& t : p->tokens)
      if (t.symbol == minilang::kNoSymbol && !p->holes[t.index]) ++counts[t.text];
    for (minilang::TypeId t = 1; t < static_cast<minilang::TypeId>(p->lattice.size()); ++t)
      type_names.insert(p->lattice.name(t));
  }
  for (const auto& [text, n] : counts)
    if (n >= min_count) v.add_lexeme(text);
  for (const auto& name : type_names) v.add_type(name);
  return v;
}

int Vocab::lexeme(const std::string& text) const {
  auto it = lexeme_index_.find(text);
  return it == lexeme_index_.end() ? kUnkToken : it->second;
}

int Vocab::type(const std::string& name) const {
  auto it = type_index_.find(name);
  return it == type_index_.end() ? kUnkType : it->second;
}

nlohmann::json Vocab::to_json() const { return {{"lexemes", lexemes_}, {"types", types_}}; }

Vocab Vocab::from_json(const nlohmann::json& j) {
  Vocab v;
  for (const auto& s : j.at("lexemes")) v.add_lexeme(s.get<std::string>());
  for (const auto& s : j.at("types")) v.add_type(s.get<std::string>());
  return v;
}

Model::Model(ModelConfig config, Vocab vocab, std::uint64_t seed) : config_(config), vocab_(std::move(vocab)) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const auto H = static_cast<std::size_t>(config_.hidden);
  const auto E = static_cast<std::size_t>(config_.embed);

  type_embedding = &params_.add("type_embedding", {vocab_.type_count(), E});
  nn::glorot_uniform(*type_embedding, E, E, rng);
  token_embedding = &params_.add("token_embedding", {vocab_.lexeme_count(), E});
  nn::glorot_uniform(*token_embedding, E, E, rng);

  if (config_.encoder == ContextEncoder::LogBilinear) {
    for (const char* side : {"prev", "next"}) {
      auto& list = side[0] == 'p' ? ctx_prev_a : ctx_next_a;
      for (int i = 0; i < config_.window; ++i) {
        nn::Tensor& a = params_.add(std::string("ctx.") + side + ".A" + std::to_string(i), {H, E});
        nn::glorot_uniform(a, E, H, rng);
        list.push_back(&a);
      }
    }
  } else {
    ctx_prev_gru = nn::GruCell::create(params_, "ctx.prev.gru", E, H, rng);
    ctx_next_gru = nn::GruCell::create(params_, "ctx.next.gru", E, H, rng);
  }
  ctx_w = &params_.add("ctx.W", {H, 2 * H});
  nn::glorot_uniform(*ctx_w, 2 * H, H, rng);

  if (uses_lexical_gru()) {
    lex_prev_gru = nn::GruCell::create(params_, "lex.prev.gru", H, H, rng);
    lex_next_gru = nn::GruCell::create(params_, "lex.next.gru", H, H, rng);
    lex_w = &params_.add("lex.W", {H, 2 * H});
    nn::glorot_uniform(*lex_w, 2 * H, H, rng);
  }
  if (uses_tree()) {
    tree_prev_gru = nn::GruCell::create(params_, "tree.prev.gru", H, H, rng);
    tree_next_gru = nn::GruCell::create(params_, "tree.next.gru", H, H, rng);
    tree_w = &params_.add("tree.W", {H, 2 * H});
    nn::glorot_uniform(*tree_w, 2 * H, H, rng);
  }
  if (config_.variant == Variant::Hybrid) {
    hybrid_w = &params_.add("hybrid.W", {H, 2 * H});
    nn::glorot_uniform(*hybrid_w, 2 * H, H, rng);
  }
}

}  // namespace smartpaste::models
