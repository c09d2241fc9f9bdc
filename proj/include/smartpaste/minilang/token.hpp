// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smartpaste::minilang {

using SymbolId = std::int32_t;
using TypeId = std::int32_t;

inline constexpr SymbolId kNoSymbol = -1;

enum class TokenKind : std::uint8_t {
  Keyword,
  Identifier,
  IntLiteral,
  StringLiteral,
  BoolLiteral,
  Operator,
  Punctuation,
};

std::string_view to_string(TokenKind kind);
TokenKind token_kind_from_string(std::string_view s);

struct Token {
  int index = 0;
  std::string text;
  TokenKind kind = TokenKind::Punctuation;
  SymbolId symbol = kNoSymbol;  // set by the checker for variable occurrences
  bool is_def = false;          // defining occurrence of a declaration
  int line = 0;                 // 1-based
  int column = 0;               // 1-based, counted in code points
  std::string leading;          // whitespace and comments before the lexeme
};

/// Half-open token interval [lo, hi).
struct TokenSpan {
  int lo = 0;
  int hi = 0;
  bool contains(int t) const { return lo <= t && t < hi; }
  bool contains(TokenSpan o) const { return lo <= o.lo && o.hi <= hi; }
  int size() const { return hi - lo; }
  friend bool operator==(TokenSpan, TokenSpan) = default;
};

/// Base class for source-level diagnostics.
class SourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LexError : public SourceError {
 public:
  LexError(int line, int column, const std::string& msg);
  int line;
  int column;
};

}  // namespace smartpaste::minilang
