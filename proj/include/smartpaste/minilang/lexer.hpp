// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "smartpaste/minilang/token.hpp"

namespace smartpaste::minilang {

struct TokenStream {
  std::vector<Token> tokens;
  std::string trailing;  // trivia after the last token

  /// Lexemes joined with their original leading trivia; equals the lexed source.
  std::string reconstruct() const;
};

bool is_keyword(std::string_view word);

/// Splits MiniLang source into tokens. Throws LexError on characters outside the language.
TokenStream tokenize(std::string_view source);

}  // namespace smartpaste::minilang
