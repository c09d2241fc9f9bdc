// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smartpaste/dataflow/cfg.hpp"

namespace smartpaste::dataflow {

/// Pseudo-token marking "no prior (or next) use on some path".
inline constexpr int kEpsilon = -1;

/// Sorted, duplicate-free token indices; kEpsilon sorts first.
using TokenSet = std::vector<int>;

enum class Direction : unsigned char { Prev, Next };

/// Lexical and data-flow relations of one variable, given where it occurs.
class VarFlow {
 public:
  VarFlow() = default;
  /// `occurrences` are the token indices at which the variable appears, in any order.
  VarFlow(const Cfg& cfg, std::vector<int> occurrences);

  const std::vector<int>& occurrences() const { return occ_; }
  std::optional<int> lex_prev(int t) const;
  std::optional<int> lex_next(int t) const;
  /// Empty for tokens outside every CFG node.
  TokenSet df_in(int t) const;
  TokenSet df_out(int t) const;
  TokenSet df(int t, Direction d) const { return d == Direction::Prev ? df_in(t) : df_out(t); }

 private:
  const Cfg* cfg_ = nullptr;
  std::vector<int> occ_;
  std::vector<std::vector<int>> node_occ_;  // occurrences per node, ascending
  std::vector<TokenSet> reach_in_;          // forward sets at node entry
  std::vector<TokenSet> reach_out_;         // backward sets at node exit
};

/// All relations for one function under a token -> symbol binding. Holds a
/// reference to the CFG, which must outlive it.
class UseGraph {
 public:
  UseGraph(const Cfg& cfg, const std::vector<SymbolId>& binding);

  const Cfg& cfg() const { return *cfg_; }
  /// Symbols with at least one occurrence in the function, ascending.
  std::vector<SymbolId> symbols() const;
  /// Tokens that belong to a CFG node, ascending.
  std::vector<int> tokens() const;
  const VarFlow& flow(SymbolId v) const;

  std::optional<int> lex_prev(int t, SymbolId v) const { return flow(v).lex_prev(t); }
  std::optional<int> lex_next(int t, SymbolId v) const { return flow(v).lex_next(t); }
  TokenSet df_in(int t, SymbolId v) const { return flow(v).df_in(t); }
  TokenSet df_out(int t, SymbolId v) const { return flow(v).df_out(t); }

 private:
  const Cfg* cfg_;
  std::map<SymbolId, VarFlow> flows_;
  VarFlow empty_;
};

/// Symbol of each token as resolved by the checker.
std::vector<SymbolId> program_binding(const minilang::TypedProgram& program);

UseGraph dataflow_uses(const minilang::TypedProgram& program, const Cfg& cfg);

/// Lexically previous/next occurrence of v around token t.
std::pair<std::optional<int>, std::optional<int>> lexical_chain(const minilang::TypedProgram& program,
                                                                int t, SymbolId v);

/// Bounded unrolling of df_in (or df_out). The root's token is the query
/// position itself, which is not part of the tree; each child is one element
/// of its parent's df set, with kEpsilon children as terminating leaves.
struct ContextTree {
  int token = kEpsilon;
  int depth_budget = 0;
  std::vector<ContextTree> children;

  int depth() const;
  /// Every non-epsilon token below the root.
  std::vector<int> tokens() const;
};

ContextTree context_tree(const VarFlow& flow, int t, Direction d, int depth);
inline ContextTree context_tree(const UseGraph& g, int t, SymbolId v, Direction d, int depth) {
  return context_tree(g.flow(v), t, d, depth);
}

std::string format_set(const TokenSet& s);

/// One line per (token, symbol) for every variable occurrence and every symbol
/// of its function: token, symbol, lex_prev, lex_next, df_in, df_out (tab-separated).
std::string dump_dataflow(const minilang::TypedProgram& program);

}  // namespace smartpaste::dataflow
