// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/dataflow/usegraph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace smartpaste::dataflow {

namespace {

void merge_into(TokenSet& dst, const TokenSet& src, bool& changed) {
  TokenSet out;
  out.reserve(dst.size() + src.size());
  std::set_union(dst.begin(), dst.end(), src.begin(), src.end(), std::back_inserter(out));
  if (out.size() != dst.size()) {
    dst = std::move(out);
    changed = true;
  }
}

}  // namespace

VarFlow::VarFlow(const Cfg& cfg, std::vector<int> occurrences) : cfg_(&cfg), occ_(std::move(occurrences)) {
  std::sort(occ_.begin(), occ_.end());
  occ_.erase(std::unique(occ_.begin(), occ_.end()), occ_.end());
  const std::size_t n = cfg.nodes.size();
  node_occ_.assign(n, {});
  for (int t : occ_) {
    const int node = cfg.node_at(t);
    if (node >= 0) node_occ_[node].push_back(t);
  }

  // forward: reach_in_[n] = union over preds of (last occurrence in pred, else its reach_in_)
  reach_in_.assign(n, {});
  reach_in_[cfg.entry] = {kEpsilon};
  std::deque<int> work;
  std::vector<bool> queued(n, false);
  auto push = [&](int v) {
    if (!queued[v]) {
      queued[v] = true;
      work.push_back(v);
    }
  };
  for (std::size_t i = 0; i < n; ++i) push(static_cast<int>(i));
  while (!work.empty()) {
    const int v = work.front();
    work.pop_front();
    queued[v] = false;
    const TokenSet out = node_occ_[v].empty() ? reach_in_[v] : TokenSet{node_occ_[v].back()};
    for (int s : cfg.nodes[v].succ) {
      bool changed = false;
      merge_into(reach_in_[s], out, changed);
      if (changed) push(s);
    }
  }

  reach_out_.assign(n, {});
  reach_out_[cfg.exit] = {kEpsilon};
  for (std::size_t i = n; i-- > 0;) push(static_cast<int>(i));
  while (!work.empty()) {
    const int v = work.front();
    work.pop_front();
    queued[v] = false;
    const TokenSet in = node_occ_[v].empty() ? reach_out_[v] : TokenSet{node_occ_[v].front()};
    for (int p : cfg.nodes[v].pred) {
      bool changed = false;
      merge_into(reach_out_[p], in, changed);
      if (changed) push(p);
    }
  }
}

std::optional<int> VarFlow::lex_prev(int t) const {
  auto it = std::lower_bound(occ_.begin(), occ_.end(), t);
  if (it == occ_.begin()) return std::nullopt;
  return *std::prev(it);
}

std::optional<int> VarFlow::lex_next(int t) const {
  auto it = std::upper_bound(occ_.begin(), occ_.end(), t);
  if (it == occ_.end()) return std::nullopt;
  return *it;
}

TokenSet VarFlow::df_in(int t) const {
  if (cfg_ == nullptr) return {};
  const int node = cfg_->node_at(t);
  if (node < 0) return {};
  const auto& occ = node_occ_[node];
  auto it = std::lower_bound(occ.begin(), occ.end(), t);
  if (it != occ.begin()) return {*std::prev(it)};
  return reach_in_[node];
}

TokenSet VarFlow::df_out(int t) const {
  if (cfg_ == nullptr) return {};
  const int node = cfg_->node_at(t);
  if (node < 0) return {};
  const auto& occ = node_occ_[node];
  auto it = std::upper_bound(occ.begin(), occ.end(), t);
  if (it != occ.end()) return {*it};
  return reach_out_[node];
}

UseGraph::UseGraph(const Cfg& cfg, const std::vector<SymbolId>& binding) : cfg_(&cfg) {
  std::map<SymbolId, std::vector<int>> occ;
  const auto span = cfg.function_span;
  for (int t = span.lo; t < span.hi && t < static_cast<int>(binding.size()); ++t)
    if (binding[t] != minilang::kNoSymbol) occ[binding[t]].push_back(t);
  for (auto& [v, ts] : occ) flows_.emplace(v, VarFlow(cfg, std::move(ts)));
}

std::vector<SymbolId> UseGraph::symbols() const {
  std::vector<SymbolId> out;
  for (const auto& [v, f] : flows_) out.push_back(v);
  return out;
}

std::vector<int> UseGraph::tokens() const {
  std::vector<int> out;
  for (int t = cfg_->function_span.lo; t < cfg_->function_span.hi; ++t)
    if (cfg_->node_at(t) >= 0) out.push_back(t);
  return out;
}

const VarFlow& UseGraph::flow(SymbolId v) const {
  auto it = flows_.find(v);
  return it == flows_.end() ? empty_ : it->second;
}

std::vector<SymbolId> program_binding(const minilang::TypedProgram& program) {
  std::vector<SymbolId> b;
  b.reserve(program.tokens.size());
  for (const auto& t : program.tokens) b.push_back(t.symbol);
  return b;
}

UseGraph dataflow_uses(const minilang::TypedProgram& program, const Cfg& cfg) {
  return UseGraph(cfg, program_binding(program));
}

std::pair<std::optional<int>, std::optional<int>> lexical_chain(const minilang::TypedProgram& program,
                                                                int t, SymbolId v) {
  std::optional<int> prev, next;
  for (const auto& tok : program.tokens) {
    if (tok.symbol != v) continue;
    if (tok.index < t) prev = tok.index;
    if (tok.index > t) {
      next = tok.index;
      break;
    }
  }
  return {prev, next};
}

int ContextTree::depth() const {
  int d = 0;
  for (const auto& c : children) d = std::max(d, 1 + c.depth());
  return d;
}

std::vector<int> ContextTree::tokens() const {
  std::vector<int> out;
  for (const auto& c : children) {
    if (c.token != kEpsilon) out.push_back(c.token);
    auto sub = c.tokens();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

ContextTree context_tree(const VarFlow& flow, int t, Direction d, int depth) {
  ContextTree tree;
  tree.token = t;
  tree.depth_budget = std::max(depth, 0);
  if (depth <= 0 || t == kEpsilon) return tree;
  for (int c : flow.df(t, d)) tree.children.push_back(context_tree(flow, c, d, depth - 1));
  return tree;
}

std::string format_set(const TokenSet& s) {
  if (s.empty()) return "{}";
  std::string out;
  for (int t : s) {
    if (!out.empty()) out += ',';
    out += t == kEpsilon ? "eps" : std::to_string(t);
  }
  return out;
}

std::string dump_dataflow(const minilang::TypedProgram& program) {
  std::ostringstream os;
  os << "token\tsymbol\tlex_prev\tlex_next\tdf_in\tdf_out\n";
  const auto binding = program_binding(program);
  for (const Cfg& cfg : build_cfgs(program)) {
    UseGraph g(cfg, binding);
    const auto syms = g.symbols();
    for (int t = cfg.function_span.lo; t < cfg.function_span.hi; ++t) {
      if (binding[t] == minilang::kNoSymbol || cfg.node_at(t) < 0) continue;
      for (SymbolId v : syms) {
        auto opt = [](std::optional<int> x) { return x ? std::to_string(*x) : std::string("-"); };
        os << t << '\t' << program.symbol(v).name << '#' << v << '\t' << opt(g.lex_prev(t, v)) << '\t'
           << opt(g.lex_next(t, v)) << '\t' << format_set(g.df_in(t, v)) << '\t' << format_set(g.df_out(t, v))
           << '\n';
      }
    }
  }
  return os.str();
}

}  // namespace smartpaste::dataflow
