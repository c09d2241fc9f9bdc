// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smartpaste/minilang/token.hpp"

namespace smartpaste::minilang {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

enum class NodeKind : std::uint8_t {
  Program,
  TypeDecl,    // name_token; kids: TypeRef of each implemented type
  ExternFn,    // name_token; kids: parameter TypeRefs..., return TypeRef (last)
  Function,    // name_token; kids: return TypeRef, Param..., Block (last)
  Param,       // name_token; kids: TypeRef
  TypeRef,     // text = base type name, rank = array depth
  Block,       // kids: statements
  VarDecl,     // name_token; kids: TypeRef, initializer or kNoNode
  Assign,      // kids: target, value
  CompoundAssign,  // text = "+=" | "-="; kids: target, value
  IncDec,      // text = "++" | "--"; kids: target
  If,          // kids: cond, then, else or kNoNode
  While,       // kids: cond, body
  For,         // kids: init, cond, step (each may be kNoNode), body
  Return,      // kids: value (optional)
  ExprStmt,    // kids: expression
  VarRef,      // name_token
  IntLit,
  StringLit,
  BoolLit,
  Unary,       // text = operator; kids: operand
  Binary,      // text = operator; kids: lhs, rhs
  Index,       // kids: array, index
  Call,        // name_token, text = callee; kids: arguments
};

std::string_view to_string(NodeKind kind);
bool is_statement(NodeKind kind);
bool is_expression(NodeKind kind);

struct Node {
  NodeKind kind = NodeKind::Program;
  TokenSpan span;
  std::string text;  // operator, literal, or declared/referenced name
  int name_token = -1;
  int rank = 0;
  std::vector<NodeId> kids;
};

struct Ast {
  std::vector<Node> nodes;
  NodeId root = kNoNode;

  const Node& operator[](NodeId id) const { return nodes.at(id); }
  Node& operator[](NodeId id) { return nodes.at(id); }
  std::size_t size() const { return nodes.size(); }

  /// Function definitions in source order.
  std::vector<NodeId> functions() const;
};

/// S-expression rendering that ignores spans and token indices; two ASTs are
/// structurally equal iff their renderings are equal.
std::string structure(const Ast& ast, NodeId id);
inline std::string structure(const Ast& ast) { return structure(ast, ast.root); }

}  // namespace smartpaste::minilang
