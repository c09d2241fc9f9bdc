// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/models/encoder.hpp"

#include <algorithm>

namespace smartpaste::models {

using dataflow::Direction;
using dataflow::kEpsilon;

InstanceView::InstanceView(const taskgen::TaskInstance& inst, const Vocab& vocab, bool use_types) : inst_(&inst) {
  const auto& p = *inst.program;
  const auto fn = p.function_of_token.at(static_cast<std::size_t>(inst.snippet_span.lo));
  if (fn == minilang::kNoNode) throw std::invalid_argument("snippet lies outside every function");
  cfg_ = std::make_shared<const dataflow::Cfg>(dataflow::build_cfg(p, fn));
  rows_.reserve(p.tokens.size());
  for (const auto& t : p.tokens) {
    if (p.holes[static_cast<std::size_t>(t.index)]) rows_.push_back(Vocab::kPlaceholder);
    else if (t.symbol != minilang::kNoSymbol) rows_.push_back(-1);
    else rows_.push_back(vocab.lexeme(t.text));
  }
  for (const auto& s : p.symbols) {
    std::vector<int> rows;
    if (use_types) {
      for (auto ty : minilang::supertype_closure(p.lattice, s.declared_type))
        rows.push_back(vocab.type(p.lattice.name(ty)));
      std::sort(rows.begin(), rows.end());
      rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    } else {
      rows.push_back(Vocab::kUnkType);
    }
    closures_.push_back(std::move(rows));
  }
}

std::vector<int> InstanceView::occurrences(const Binding& binding, SymbolId v, int extra) const {
  std::vector<int> occ;
  const auto span = cfg_->function_span;
  for (int t = span.lo; t < span.hi; ++t)
    if (binding[static_cast<std::size_t>(t)] == v || t == extra) occ.push_back(t);
  return occ;
}

Dataset::Dataset(std::vector<taskgen::TaskInstance> instances, const Vocab& vocab, bool use_types)
    : instances_(std::move(instances)) {
  views_.reserve(instances_.size());
  for (const auto& inst : instances_) views_.push_back(std::make_unique<InstanceView>(inst, vocab, use_types));
}

std::size_t Dataset::placeholder_count() const {
  std::size_t n = 0;
  for (const auto& inst : instances_) n += inst.placeholders.size();
  return n;
}

Encoder::Encoder(Model& model, const InstanceView& view, nn::Tape& tape, bool training, std::mt19937_64* rng)
    : model_(model), view_(view), tape_(tape), training_(training), rng_(rng) {
  if (training_ && rng_ == nullptr) throw std::invalid_argument("training encoder needs an rng");
}

void Encoder::reset_tape() {
  tape_.clear();
  type_vars_.clear();
  ctx_vars_.clear();
  for (auto& [k, f] : flows_) {
    f.tree[0].clear();
    f.tree[1].clear();
  }
}

Var Encoder::type_embed(SymbolId v) {
  if (auto it = type_vars_.find(v); it != type_vars_.end()) return it->second;
  const auto& closure = view_.closure_rows(v);
  const std::vector<int>* rows = &closure;
  if (training_ && closure.size() > 1) {
    auto [it, fresh] = type_rows_.try_emplace(v);
    if (fresh) {
      // keep each closure member with probability 1/2; redraw empty subsets
      do {
        it->second.clear();
        for (int r : closure)
          if (nn::uniform01(*rng_) < 0.5) it->second.push_back(r);
      } while (it->second.empty());
    }
    rows = &it->second;
  }
  std::vector<Var> xs;
  for (int r : *rows) xs.push_back(tape_.row(*model_.type_embedding, static_cast<std::size_t>(r)));
  const Var out = xs.size() == 1 ? xs[0] : tape_.max(xs);
  type_vars_[v] = out;
  return out;
}

Var Encoder::token_repr(int t) {
  const auto n = static_cast<int>(view_.program().tokens.size());
  if (t < 0 || t >= n) return tape_.row(*model_.token_embedding, Vocab::kPad);
  const int row = view_.token_row(t);
  if (row >= 0) return tape_.row(*model_.token_embedding, static_cast<std::size_t>(row));
  return type_embed(view_.program().tokens[static_cast<std::size_t>(t)].symbol);
}

Var Encoder::context(int t) {
  if (auto it = ctx_vars_.find(t); it != ctx_vars_.end()) return it->second;
  const auto H = static_cast<std::size_t>(model_.config().hidden);
  Var out;
  if (t == kEpsilon) {
    out = tape_.zeros(H);
  } else if (auto cv = ctx_values_.find(t); cv != ctx_values_.end()) {
    out = tape_.constant(cv->second);
  } else {
    const int C = model_.config().window;
    Var fp, fn;
    if (model_.config().encoder == ContextEncoder::LogBilinear) {
      // f(x_1..x_C) = sum_i A_i x_i
      std::vector<Var> prev, next;
      for (int i = 0; i < C; ++i) {
        prev.push_back(tape_.linear(*model_.ctx_prev_a[static_cast<std::size_t>(i)], token_repr(t - C + i)));
        next.push_back(tape_.linear(*model_.ctx_next_a[static_cast<std::size_t>(i)], token_repr(t + 1 + i)));
      }
      fp = tape_.sum(prev);
      fn = tape_.sum(next);
    } else {
      // both GRUs read towards t, starting from a zero state
      fp = tape_.zeros(H);
      for (int i = t - C; i < t; ++i) fp = nn::gru_step(tape_, model_.ctx_prev_gru, token_repr(i), fp);
      fn = tape_.zeros(H);
      for (int i = t + C; i > t; --i) fn = nn::gru_step(tape_, model_.ctx_next_gru, token_repr(i), fn);
    }
    out = tape_.linear(*model_.ctx_w, tape_.concat(fp, fn));
    if (!training_) {
      auto v = tape_.value(out);
      ctx_values_.emplace(t, std::vector<Real>(v.begin(), v.end()));
    }
  }
  ctx_vars_[t] = out;
  return out;
}

Encoder::FlowEntry& Encoder::flow_for(SymbolId v, const std::vector<int>& occ) {
  auto key = std::make_pair(v, occ);
  auto it = flows_.find(key);
  if (it == flows_.end()) it = flows_.emplace(std::move(key), FlowEntry{dataflow::VarFlow(view_.cfg(), occ), {}}).first;
  return it->second;
}

Var Encoder::avg_usage(int t, SymbolId v, const FlowEntry& f) {
  const auto& occ = f.flow.occurrences();
  const auto pos = static_cast<int>(std::lower_bound(occ.begin(), occ.end(), t) - occ.begin());
  const int L = model_.config().chain;
  std::vector<Var> ctx;
  for (int k = 1; k <= L && pos - k >= 0; ++k) ctx.push_back(context(occ[static_cast<std::size_t>(pos - k)]));
  for (int k = 1; k <= L && pos + k < static_cast<int>(occ.size()); ++k)
    ctx.push_back(context(occ[static_cast<std::size_t>(pos + k)]));
  const Var te = type_embed(v);
  if (ctx.empty()) return te;
  return tape_.add(te, tape_.mean(ctx));
}

Var Encoder::gru_usage(int t, SymbolId v, const FlowEntry& f) {
  const auto& occ = f.flow.occurrences();
  const auto pos = static_cast<int>(std::lower_bound(occ.begin(), occ.end(), t) - occ.begin());
  const int L = model_.config().chain;
  const Var te = type_embed(v);
  // chronological order on both sides
  Var hp = te;
  for (int k = std::min(L, pos); k >= 1; --k)
    hp = nn::gru_step(tape_, model_.lex_prev_gru, context(occ[static_cast<std::size_t>(pos - k)]), hp);
  Var hn = te;
  for (int k = 1; k <= L && pos + k < static_cast<int>(occ.size()); ++k)
    hn = nn::gru_step(tape_, model_.lex_next_gru, context(occ[static_cast<std::size_t>(pos + k)]), hn);
  return tape_.linear(*model_.lex_w, tape_.concat(hp, hn));
}

Var Encoder::tree_state(SymbolId v, FlowEntry& f, Direction d, int token, int depth) {
  const Var te = type_embed(v);
  if (depth <= 0) return te;
  auto& memo = f.tree[d == Direction::Prev ? 0 : 1];
  const auto key = std::make_pair(token, depth);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  const auto kids = f.flow.df(token, d);
  const nn::GruCell& cell = d == Direction::Prev ? model_.tree_prev_gru : model_.tree_next_gru;
  Var out = te;
  if (!kids.empty()) {
    std::vector<Var> states;
    for (int c : kids) {
      if (c == kEpsilon) {
        auto eps = memo.find({kEpsilon, 0});
        if (eps == memo.end()) eps = memo.emplace(std::make_pair(kEpsilon, 0), nn::gru_step(tape_, cell, context(kEpsilon), te)).first;
        states.push_back(eps->second);
      } else {
        states.push_back(nn::gru_step(tape_, cell, context(c), tree_state(v, f, d, c, depth - 1)));
      }
    }
    out = states.size() == 1 ? states[0] : tape_.max(states);
  }
  memo.emplace(key, out);
  return out;
}

Var Encoder::tree_usage(int t, SymbolId v, FlowEntry& f) {
  const int D = model_.config().depth;
  const Var p = tree_state(v, f, Direction::Prev, t, D);
  const Var n = tree_state(v, f, Direction::Next, t, D);
  return tape_.linear(*model_.tree_w, tape_.concat(p, n));
}

Var Encoder::usage(int t, SymbolId v, const Binding& binding) {
  const auto occ = view_.occurrences(binding, v, t);
  FlowEntry& f = flow_for(v, occ);
  switch (model_.config().variant) {
    case Variant::Loc: return type_embed(v);
    case Variant::AvgG: return avg_usage(t, v, f);
    case Variant::GruG: return gru_usage(t, v, f);
    case Variant::GruD: return tree_usage(t, v, f);
    case Variant::Hybrid: {
      const Var a = avg_usage(t, v, f);
      const Var d = tree_usage(t, v, f);
      return tape_.linear(*model_.hybrid_w, tape_.concat(a, d));
    }
  }
  throw VariantError("unknown variant");
}

std::vector<Real> Encoder::context_value(int t) {
  if (auto it = ctx_values_.find(t); it != ctx_values_.end()) return it->second;
  if (tape_.node_count() > 200000) reset_tape();
  auto v = tape_.value(context(t));
  return {v.begin(), v.end()};
}

std::vector<Real> Encoder::usage_value(int t, SymbolId v, const Binding& binding) {
  auto key = std::make_pair(std::make_pair(t, v), view_.occurrences(binding, v, t));
  if (auto it = usage_values_.find(key); it != usage_values_.end()) return it->second;
  reset_tape();
  auto val = tape_.value(usage(t, v, binding));
  std::vector<Real> out(val.begin(), val.end());
  usage_values_.emplace(std::move(key), out);
  return out;
}

}  // namespace smartpaste::models
