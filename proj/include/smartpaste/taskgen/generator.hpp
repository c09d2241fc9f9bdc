// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smartpaste::taskgen {

/// Template families for synthetic programs.
///   mixed    - loops, accumulators, string/path helpers, flag checks, per-project nominal types
///   typesep  - every variable of a function has a distinct type
///   loops    - counter / accumulator / bound integers over an int array
///   stress   - random nested control flow over ints (for dataflow fuzzing)
///   straight - branch-free, loop-free straight-line code
enum class Profile { Mixed, TypeSep, Loops, Stress, Straight };

Profile profile_from_string(std::string_view s);
std::string_view to_string(Profile p);

struct GenOptions {
  std::uint64_t seed = 1;
  int projects = 5;
  int files_per_project = 4;
  int functions_per_file = 3;
  Profile profile = Profile::Mixed;
  int max_statements = 12;  // per function body (stress / straight)
};

struct SourceFile {
  std::string project;
  std::string name;  // file name including the .ml0 extension
  std::string text;

  /// "project/name"; used as program id and split key.
  std::string id() const { return project + "/" + name; }
};

/// Deterministic in the options. Every produced file type-checks.
std::vector<SourceFile> generate_corpus(const GenOptions& options);

/// One directory per project holding its .ml0 files.
void write_corpus(const std::string& dir, const std::vector<SourceFile>& files);
/// Reads every `<dir>/<project>/*.ml0`, sorted by id.
std::vector<SourceFile> read_corpus(const std::string& dir);

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorpusSplit {
  std::vector<std::string> train, valid, test, unseen_test;  // file ids
};

/// Holds out round(unseen_fraction * projects) whole projects, then splits the
/// remaining files 60/5/35 after a seeded shuffle. Throws InsufficientData when
/// a partition (other than unseen_test at fraction 0) would be empty.
CorpusSplit split_corpus(const std::vector<SourceFile>& files, std::uint64_t seed, double unseen_fraction = 0.2);

}  // namespace smartpaste::taskgen
