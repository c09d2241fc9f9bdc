// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/minilang/lexer.hpp"

#include <array>
#include <cctype>

namespace smartpaste::minilang {

namespace {

constexpr std::array<std::string_view, 15> kKeywords = {
    "int", "bool", "string", "void", "type", "implements", "extern", "fn",
    "if", "else", "while", "for", "return", "true", "false"};

constexpr std::array<std::string_view, 11> kTwoCharOps = {"&&", "||", "==", "!=", "<=", ">=",
                                                          "+=", "-=", "++", "--", "->"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::IntLiteral: return "int-literal";
    case TokenKind::StringLiteral: return "string-literal";
    case TokenKind::BoolLiteral: return "bool-literal";
    case TokenKind::Operator: return "operator";
    case TokenKind::Punctuation: return "punctuation";
  }
  return "?";
}

TokenKind token_kind_from_string(std::string_view s) {
  for (auto k : {TokenKind::Keyword, TokenKind::Identifier, TokenKind::IntLiteral,
                 TokenKind::StringLiteral, TokenKind::BoolLiteral, TokenKind::Operator,
                 TokenKind::Punctuation}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown token kind: " + std::string(s));
}

LexError::LexError(int l, int c, const std::string& msg)
    : SourceError(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), column(c) {}

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords)
    if (k == word) return true;
  return false;
}

std::string TokenStream::reconstruct() const {
  std::string out;
  for (const auto& t : tokens) {
    out += t.leading;
    out += t.text;
  }
  out += trailing;
  return out;
}

TokenStream tokenize(std::string_view src) {
  TokenStream out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  std::string trivia;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if (!is_continuation(src[i])) {
        ++col;
      }
    }
  };
  auto emit = [&](std::size_t len, TokenKind kind, int tline, int tcol) {
    Token t;
    t.index = static_cast<int>(out.tokens.size());
    t.text = std::string(src.substr(i - len, len));
    t.kind = kind;
    t.line = tline;
    t.column = tcol;
    t.leading = std::move(trivia);
    trivia.clear();
    out.tokens.push_back(std::move(t));
  };

  while (i < src.size()) {
    const char c = src[i];
    const std::size_t start = i;
    const int tline = line, tcol = col;
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      trivia.append(src.substr(start, 1));
      continue;
    }
    if (src.substr(i, 2) == "//") {
      while (i < src.size() && src[i] != '\n') advance(1);
      trivia.append(src.substr(start, i - start));
      continue;
    }
    if (ident_start(c)) {
      while (i < src.size() && ident_char(src[i])) advance(1);
      const auto word = src.substr(start, i - start);
      TokenKind kind = TokenKind::Identifier;
      if (word == "true" || word == "false") kind = TokenKind::BoolLiteral;
      else if (is_keyword(word)) kind = TokenKind::Keyword;
      emit(i - start, kind, tline, tcol);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance(1);
      if (i < src.size() && ident_start(src[i]))
        throw LexError(line, col, "malformed integer literal");
      emit(i - start, TokenKind::IntLiteral, tline, tcol);
      continue;
    }
    if (c == '"') {
      advance(1);
      while (true) {
        if (i >= src.size() || src[i] == '\n') throw LexError(tline, tcol, "unterminated string literal");
        if (src[i] == '\\') {
          if (i + 1 >= src.size() || (src[i + 1] != '"' && src[i + 1] != '\\' && src[i + 1] != 'n'))
            throw LexError(line, col, "invalid escape sequence");
          advance(2);
          continue;
        }
        if (src[i] == '"') {
          advance(1);
          break;
        }
        advance(1);
      }
      emit(i - start, TokenKind::StringLiteral, tline, tcol);
      continue;
    }
    bool matched = false;
    for (auto op : kTwoCharOps) {
      if (src.substr(i, 2) == op) {
        advance(2);
        emit(2, op == "->" ? TokenKind::Punctuation : TokenKind::Operator, tline, tcol);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    switch (c) {
      case '+': case '-': case '*': case '/': case '%': case '<': case '>': case '=': case '!':
        advance(1);
        emit(1, TokenKind::Operator, tline, tcol);
        continue;
      case '(': case ')': case '{': case '}': case '[': case ']': case ';': case ',':
        advance(1);
        emit(1, TokenKind::Punctuation, tline, tcol);
        continue;
      default:
        break;
    }
    throw LexError(tline, tcol, "unexpected character");
  }
  out.trailing = std::move(trivia);
  return out;
}

}  // namespace smartpaste::minilang
