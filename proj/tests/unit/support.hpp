// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "smartpaste/minilang/checker.hpp"
#include "smartpaste/taskgen/instance.hpp"

namespace testsupport {

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(SMARTPASTE_FIXTURES) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Token index of the k-th variable occurrence (0-based, in token order).
inline int occurrence(const smartpaste::minilang::TypedProgram& p, int k) {
  for (const auto& t : p.tokens)
    if (t.symbol != smartpaste::minilang::kNoSymbol && k-- == 0) return t.index;
  return -1;
}

inline smartpaste::minilang::SymbolId symbol_named(const smartpaste::minilang::TypedProgram& p,
                                                   const std::string& name) {
  for (const auto& s : p.symbols)
    if (s.name == name) return s.id;
  return smartpaste::minilang::kNoSymbol;
}

/// Instance over the widest snippet of `src`.
inline smartpaste::taskgen::TaskInstance widest_instance(const std::string& src) {
  const auto p = smartpaste::minilang::compile(src);
  const auto spans = smartpaste::taskgen::select_snippets(p);
  auto best = spans.at(0);
  for (auto s : spans)
    if (s.size() > best.size()) best = s;
  return smartpaste::taskgen::make_instance(p, best, "widest");
}

/// The sum_positive program with the for statement as the snippet.
inline smartpaste::taskgen::TaskInstance sum_positive_instance() {
  const auto p = smartpaste::minilang::compile(read_fixture("sum_positive.ml0"), "sum_positive.ml0");
  for (const auto& n : p.ast.nodes)
    if (n.kind == smartpaste::minilang::NodeKind::For) return smartpaste::taskgen::make_instance(p, n.span);
  throw std::logic_error("fixture has no for statement");
}

}  // namespace testsupport
