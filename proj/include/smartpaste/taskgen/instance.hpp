// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "smartpaste/minilang/checker.hpp"

namespace smartpaste::taskgen {

using minilang::SymbolId;
using minilang::TokenSpan;
using minilang::TypedProgram;

class NoPlaceholders : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InstanceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Placeholder {
  int token = -1;
  SymbolId truth = minilang::kNoSymbol;
  std::vector<SymbolId> candidates;            // ascending
  std::vector<SymbolId> same_type_candidates;  // ascending
};

/// A program with a snippet whose variable uses were replaced by placeholders.
/// Placeholder tokens carry no symbol in `program` and are flagged in `program->holes`.
struct TaskInstance {
  std::string program_id;
  std::shared_ptr<const TypedProgram> program;
  TokenSpan snippet_span;
  std::vector<Placeholder> placeholders;

  /// Symbol per token with every placeholder set to its truth.
  std::vector<SymbolId> truth_binding() const;
  int index_of(int token) const;
};

/// Sibling-statement runs of at most `max_tokens` tokens containing at least
/// one non-defining variable occurrence. Sorted by (lo, hi), duplicate-free.
std::vector<TokenSpan> select_snippets(const TypedProgram& program, int max_tokens = 80);

/// Throws NoPlaceholders when the span holds no non-defining variable occurrence.
TaskInstance make_instance(const TypedProgram& program, TokenSpan span, std::string program_id = {});

/// All snippets of a program, one instance each.
std::vector<TaskInstance> extract_instances(const TypedProgram& program, int max_tokens = 80);

std::string instance_to_json(const TaskInstance& inst);
/// Re-lexes and re-checks the recorded tokens; throws InstanceFormatError on any mismatch.
TaskInstance instance_from_json(const std::string& line);

void write_instances(std::ostream& out, const std::vector<TaskInstance>& instances);
std::vector<TaskInstance> read_instances(std::istream& in);
std::vector<TaskInstance> read_instances_file(const std::string& path);
void write_instances_file(const std::string& path, const std::vector<TaskInstance>& instances);

}  // namespace smartpaste::taskgen
