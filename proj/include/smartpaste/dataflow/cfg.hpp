// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "smartpaste/minilang/checker.hpp"

namespace smartpaste::dataflow {

using minilang::NodeId;
using minilang::SymbolId;
using minilang::TokenSpan;

struct CfgNode {
  enum class Role : unsigned char { Entry, Exit, Statement, Condition, ForInit, ForStep };
  Role role = Role::Statement;
  NodeId ast = minilang::kNoNode;  // statement or condition expression it was built from
  std::vector<TokenSpan> spans;
  std::vector<int> succ;
  std::vector<int> pred;
};

/// Intra-procedural control flow graph. Unreachable statements are dropped.
struct Cfg {
  NodeId function = minilang::kNoNode;
  TokenSpan function_span;
  std::vector<CfgNode> nodes;
  int entry = 0;
  int exit = 1;
  std::vector<int> node_of_token;  // indexed by token - function_span.lo; -1 outside nodes

  int node_at(int token) const {
    if (!function_span.contains(token)) return -1;
    return node_of_token[token - function_span.lo];
  }
  bool has_edge(int from, int to) const;
  /// Node whose AST origin is `ast`, or -1.
  int node_for_ast(NodeId ast) const;
};

Cfg build_cfg(const minilang::TypedProgram& program, NodeId function);

/// One CFG per function definition, in source order.
std::vector<Cfg> build_cfgs(const minilang::TypedProgram& program);

/// Index into `cfgs` of the CFG containing token `t`, or -1.
int cfg_containing(const std::vector<Cfg>& cfgs, int t);

}  // namespace smartpaste::dataflow
