// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "smartpaste/minilang/ast.hpp"
#include "smartpaste/minilang/token.hpp"

namespace smartpaste::minilang {

class ParseError : public SourceError {
 public:
  ParseError(int token_index, std::vector<std::string> expected, const std::string& found);
  int token_index;
  std::vector<std::string> expected;
};

/// Parses a whole compilation unit.
Ast parse(std::span<const Token> tokens);

/// Parses a bare statement sequence (used for pasted snippets). The root is a Block
/// whose span covers all tokens.
Ast parse_statements(std::span<const Token> tokens);

/// Canonical single-space rendering of an AST.
std::string pretty_print(const Ast& ast);

}  // namespace smartpaste::minilang
