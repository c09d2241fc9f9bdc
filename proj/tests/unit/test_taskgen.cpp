// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "smartpaste/taskgen/generator.hpp"
#include "smartpaste/taskgen/instance.hpp"
#include "support.hpp"

using namespace smartpaste;
using namespace smartpaste::taskgen;

namespace {

std::vector<std::string> names(const TypedProgram& p, const std::vector<SymbolId>& ids) {
  std::vector<std::string> out;
  for (auto id : ids) out.push_back(p.symbols[id].name);
  return out;
}

std::vector<TypedProgram> corpus_programs(Profile profile, std::uint64_t seed, int files = 2) {
  GenOptions o;
  o.seed = seed;
  o.projects = 2;
  o.files_per_project = files;
  o.profile = profile;
  std::vector<TypedProgram> out;
  for (const auto& f : generate_corpus(o)) out.push_back(minilang::compile(f.text, f.id()));
  return out;
}

}  // namespace

TEST_CASE("select_snippets on a two-statement body keeps runs with a use") {
  const auto p = minilang::compile("int f() {\n  int x = 0;\n  return x;\n}\n");
  // int f ( ) { int x = 0 ; return x ; }
  const auto spans = select_snippets(p);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].lo == 5);
  CHECK(spans[0].hi == 13);
  CHECK(spans[1].lo == 10);
  CHECK(spans[1].hi == 13);
}

TEST_CASE("select_snippets drops statements over the token budget") {
  std::string body = "int f(int a) {\n  return a";
  for (int i = 0; i < 50; ++i) body += " + a";
  body += ";\n}\n";
  CHECK(select_snippets(minilang::compile(body)).empty());
  CHECK_FALSE(select_snippets(minilang::compile(body), 200).empty());
}

TEST_CASE("sum_positive snippet placeholders") {
  const auto inst = testsupport::sum_positive_instance();
  const auto& p = *inst.program;
  REQUIRE(inst.placeholders.size() == 8);
  std::vector<std::string> truths;
  for (const auto& ph : inst.placeholders) {
    CHECK(names(p, ph.candidates) == std::vector<std::string>{"arr", "lim", "sum", "i"});
    truths.push_back(p.symbols[ph.truth].name);
  }
  CHECK(truths == std::vector<std::string>{"i", "lim", "i", "arr", "i", "sum", "arr", "i"});
  CHECK(names(p, inst.placeholders[4].same_type_candidates) == std::vector<std::string>{"lim", "sum", "i"});
  CHECK(names(p, inst.placeholders[3].same_type_candidates) == std::vector<std::string>{"arr"});
}

TEST_CASE("sum_positive snippet is among the selected intervals") {
  const auto inst = testsupport::sum_positive_instance();
  const auto spans = select_snippets(minilang::compile(testsupport::read_fixture("sum_positive.ml0")));
  CHECK(std::any_of(spans.begin(), spans.end(), [&](TokenSpan s) {
    return s.lo == inst.snippet_span.lo && s.hi == inst.snippet_span.hi;
  }));
}

TEST_CASE("a declaration-only span has no placeholders") {
  const auto p = minilang::compile("int f() {\n  int z = 0;\n  return z;\n}\n");
  CHECK_THROWS_AS(make_instance(p, TokenSpan{5, 10}), NoPlaceholders);
}

TEST_CASE("property: instance invariants over generated corpora") {
  for (auto profile : {Profile::Mixed, Profile::TypeSep, Profile::Loops, Profile::Stress}) {
    CAPTURE(to_string(profile));
    for (const auto& p : corpus_programs(profile, 7)) {
      for (const auto& inst : extract_instances(p)) {
        REQUIRE_FALSE(inst.placeholders.empty());
        const auto& q = *inst.program;
        const auto fn = p.function_of_token[inst.snippet_span.lo];
        CHECK(fn != minilang::kNoNode);
        CHECK(p.function_of_token[inst.snippet_span.hi - 1] == fn);
        CHECK(inst.snippet_span.size() <= 80);
        const auto truth = inst.truth_binding();
        REQUIRE(truth.size() == p.tokens.size());
        for (std::size_t t = 0; t < p.tokens.size(); ++t) {
          CHECK(truth[t] == p.tokens[t].symbol);
          CHECK(q.tokens[t].text == p.tokens[t].text);
        }
        for (const auto& ph : inst.placeholders) {
          CHECK(ph.token >= inst.snippet_span.lo);
          CHECK(ph.token < inst.snippet_span.hi);
          CHECK(q.holes[ph.token]);
          CHECK(ph.candidates == minilang::vars_in_scope(p, ph.token));
          CHECK(std::is_sorted(ph.same_type_candidates.begin(), ph.same_type_candidates.end()));
          CHECK(std::includes(ph.candidates.begin(), ph.candidates.end(), ph.same_type_candidates.begin(),
                              ph.same_type_candidates.end()));
          CHECK(std::binary_search(ph.same_type_candidates.begin(), ph.same_type_candidates.end(), ph.truth));
          for (auto c : ph.same_type_candidates)
            CHECK(q.symbols[c].declared_type == q.symbols[ph.truth].declared_type);
        }
      }
    }
  }
}

TEST_CASE("instance JSON round-trip") {
  std::vector<TaskInstance> all;
  for (const auto& p : corpus_programs(Profile::Mixed, 3, 1))
    for (auto& inst : extract_instances(p)) all.push_back(std::move(inst));
  REQUIRE_FALSE(all.empty());
  std::stringstream ss;
  write_instances(ss, all);
  const auto back = read_instances(ss);
  REQUIRE(back.size() == all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(instance_to_json(back[i]) == instance_to_json(all[i]));
    CHECK(back[i].truth_binding() == all[i].truth_binding());
  }
}

TEST_CASE("instance JSON rejects tampered records") {
  const auto line = instance_to_json(testsupport::sum_positive_instance());
  CHECK_THROWS_AS(instance_from_json("{}"), InstanceFormatError);
  CHECK_THROWS(instance_from_json(line.substr(0, line.size() / 2)));
  auto j = line;
  const auto at = j.find("\"lim\"");
  REQUIRE(at != std::string::npos);
  j.replace(at, 5, "\"lxm\"");
  CHECK_THROWS_AS(instance_from_json(j), InstanceFormatError);
}

TEST_CASE("corpus generation is deterministic and type-checks") {
  GenOptions o;
  o.projects = 1;
  o.files_per_project = 1;
  const auto a = generate_corpus(o);
  const auto b = generate_corpus(o);
  REQUIRE(a.size() == 1);
  CHECK(a[0].text == b[0].text);
  o.seed = 2;
  CHECK(generate_corpus(o)[0].text != a[0].text);
  for (auto profile : {Profile::Mixed, Profile::TypeSep, Profile::Loops, Profile::Stress, Profile::Straight}) {
    o.profile = profile;
    o.projects = 2;
    o.files_per_project = 3;
    for (const auto& f : generate_corpus(o)) CHECK_NOTHROW(minilang::compile(f.text, f.id()));
  }
}

TEST_CASE("projects share only primitive types") {
  GenOptions o;
  o.projects = 5;
  o.files_per_project = 2;
  std::map<std::string, std::set<std::string>> by_project;
  for (const auto& f : generate_corpus(o)) {
    const auto p = minilang::compile(f.text, f.id());
    for (const auto& s : p.symbols) {
      const auto name = p.lattice.name(s.declared_type);
      if (name != "int" && name != "bool" && name != "string" && name != "int[]" && name != "string[]")
        by_project[f.project].insert(std::string(name));
    }
  }
  CHECK(by_project.size() >= 2);
  for (auto i = by_project.begin(); i != by_project.end(); ++i)
    for (auto j = std::next(i); j != by_project.end(); ++j)
      for (const auto& t : i->second) CHECK_MESSAGE(j->second.count(t) == 0, t);
}

TEST_CASE("mixed corpus has non-degenerate same-type decisions") {
  double total = 0;
  std::size_t n = 0;
  for (const auto& p : corpus_programs(Profile::Mixed, 1, 4))
    for (const auto& inst : extract_instances(p))
      for (const auto& ph : inst.placeholders) {
        total += static_cast<double>(ph.same_type_candidates.size());
        ++n;
      }
  REQUIRE(n > 0);
  CHECK(total / static_cast<double>(n) >= 2.0);
}

TEST_CASE("corpus write and read round-trip") {
  GenOptions o;
  o.projects = 2;
  o.files_per_project = 2;
  const auto files = generate_corpus(o);
  const auto dir = std::filesystem::temp_directory_path() / "smartpaste_corpus_rt";
  std::filesystem::remove_all(dir);
  write_corpus(dir.string(), files);
  const auto back = read_corpus(dir.string());
  REQUIRE(back.size() == files.size());
  for (const auto& f : files) {
    const auto it = std::find_if(back.begin(), back.end(), [&](const SourceFile& g) { return g.id() == f.id(); });
    REQUIRE(it != back.end());
    CHECK(it->text == f.text);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("split ratios, disjointness and determinism") {
  std::vector<SourceFile> files;
  for (int i = 0; i < 100; ++i) files.push_back({"p" + std::to_string(i % 4), "f" + std::to_string(i) + ".ml0", ""});
  const auto s = split_corpus(files, 1, 0.0);
  CHECK(s.train.size() == 60);
  CHECK(s.valid.size() == 5);
  CHECK(s.test.size() == 35);
  CHECK(s.unseen_test.empty());
  std::set<std::string> all;
  for (const auto* part : {&s.train, &s.valid, &s.test, &s.unseen_test}) all.insert(part->begin(), part->end());
  CHECK(all.size() == 100);
  const auto again = split_corpus(files, 1, 0.0);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);

  const auto u = split_corpus(files, 1, 0.25);
  CHECK(u.unseen_test.size() == 25);
  std::set<std::string> unseen_projects;
  for (const auto& id : u.unseen_test) unseen_projects.insert(id.substr(0, id.find('/')));
  CHECK(unseen_projects.size() == 1);
  for (const auto* part : {&u.train, &u.valid, &u.test})
    for (const auto& id : *part) CHECK(unseen_projects.count(id.substr(0, id.find('/'))) == 0);
}

TEST_CASE("split with every project held out is insufficient") {
  std::vector<SourceFile> files{{"p", "a.ml0", ""}, {"p", "b.ml0", ""}};
  CHECK_THROWS_AS(split_corpus(files, 1, 1.0), InsufficientData);
}
