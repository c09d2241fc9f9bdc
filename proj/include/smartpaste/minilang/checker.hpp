// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "smartpaste/minilang/ast.hpp"
#include "smartpaste/minilang/lexer.hpp"
#include "smartpaste/minilang/types.hpp"

namespace smartpaste::minilang {

class CheckError : public SourceError {
 public:
  CheckError(int token, const std::string& msg);
  int token;
};
class TypeError : public CheckError {
 public:
  using CheckError::CheckError;
};
class NameError : public CheckError {
 public:
  using CheckError::CheckError;
};
class RedeclError : public CheckError {
 public:
  using CheckError::CheckError;
};

struct Symbol {
  SymbolId id = kNoSymbol;
  std::string name;
  TypeId declared_type = TypeLattice::kUnk;
  TokenSpan scope_span;
  int decl_token = -1;
  NodeId function = kNoNode;
  bool is_param = false;
};

struct FunctionSig {
  std::string name;
  std::vector<TypeId> params;
  TypeId result = TypeLattice::kVoid;
  bool external = false;
};

/// A checked compilation unit. Immutable once built.
struct TypedProgram {
  std::string file_id;
  std::vector<Token> tokens;
  std::string trailing;
  Ast ast;
  TypeLattice lattice;
  std::vector<Symbol> symbols;
  std::vector<TypeId> node_types;  // per AST node; UnkType for non-expressions
  std::map<std::string, FunctionSig, std::less<>> functions;
  std::vector<bool> holes;         // variable uses left unresolved on purpose
  std::vector<NodeId> function_of_token;  // enclosing Function node or kNoNode

  const Symbol& symbol(SymbolId id) const { return symbols.at(id); }
  std::string source() const;
};

/// Builds the lattice from the unit's `type` declarations. Throws NameError on
/// unknown supertypes and CycleError on cyclic hierarchies.
TypeLattice collect_types(const Ast& ast);

struct CheckOptions {
  /// Token indices of identifier uses that stay unbound (pasted placeholders).
  /// They type-check as a wildcard and receive no symbol.
  std::vector<int> holes;
};

TypedProgram check(Ast ast, TokenStream tokens, const TypeLattice& lattice, std::string file_id,
                   const CheckOptions& options = {});

/// tokenize + parse + collect_types + check.
TypedProgram compile(std::string_view source, std::string file_id = "<input>",
                     const CheckOptions& options = {});

/// Symbols whose scope contains token `t` and whose declaration precedes it, ascending by id.
std::vector<SymbolId> vars_in_scope(const TypedProgram& program, int t);

/// Number of statements (excluding blocks) in a function body.
int statement_count(const Ast& ast, NodeId function);

}  // namespace smartpaste::minilang
