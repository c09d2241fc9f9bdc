// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/minilang/ast.hpp"

namespace smartpaste::minilang {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Program: return "Program";
    case NodeKind::TypeDecl: return "TypeDecl";
    case NodeKind::ExternFn: return "ExternFn";
    case NodeKind::Function: return "Function";
    case NodeKind::Param: return "Param";
    case NodeKind::TypeRef: return "TypeRef";
    case NodeKind::Block: return "Block";
    case NodeKind::VarDecl: return "VarDecl";
    case NodeKind::Assign: return "Assign";
    case NodeKind::CompoundAssign: return "CompoundAssign";
    case NodeKind::IncDec: return "IncDec";
    case NodeKind::If: return "If";
    case NodeKind::While: return "While";
    case NodeKind::For: return "For";
    case NodeKind::Return: return "Return";
    case NodeKind::ExprStmt: return "ExprStmt";
    case NodeKind::VarRef: return "Var";
    case NodeKind::IntLit: return "Int";
    case NodeKind::StringLit: return "Str";
    case NodeKind::BoolLit: return "Bool";
    case NodeKind::Unary: return "Unary";
    case NodeKind::Binary: return "Binary";
    case NodeKind::Index: return "Index";
    case NodeKind::Call: return "Call";
  }
  return "?";
}

bool is_statement(NodeKind k) {
  switch (k) {
    case NodeKind::Block:
    case NodeKind::VarDecl:
    case NodeKind::Assign:
    case NodeKind::CompoundAssign:
    case NodeKind::IncDec:
    case NodeKind::If:
    case NodeKind::While:
    case NodeKind::For:
    case NodeKind::Return:
    case NodeKind::ExprStmt:
      return true;
    default:
      return false;
  }
}

bool is_expression(NodeKind k) {
  switch (k) {
    case NodeKind::VarRef:
    case NodeKind::IntLit:
    case NodeKind::StringLit:
    case NodeKind::BoolLit:
    case NodeKind::Unary:
    case NodeKind::Binary:
    case NodeKind::Index:
    case NodeKind::Call:
      return true;
    default:
      return false;
  }
}

std::vector<NodeId> Ast::functions() const {
  std::vector<NodeId> out;
  if (root == kNoNode) return out;
  for (NodeId id : nodes[root].kids)
    if (nodes[id].kind == NodeKind::Function) out.push_back(id);
  return out;
}

std::string structure(const Ast& ast, NodeId id) {
  if (id == kNoNode) return "_";
  const Node& n = ast[id];
  std::string out = "(";
  out += to_string(n.kind);
  if (!n.text.empty()) out += " " + n.text;
  if (n.rank > 0) out += " rank=" + std::to_string(n.rank);
  for (NodeId k : n.kids) out += " " + structure(ast, k);
  out += ")";
  return out;
}

}  // namespace smartpaste::minilang
