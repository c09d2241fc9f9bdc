// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "smartpaste/eval/metrics.hpp"
#include "support.hpp"

using namespace smartpaste;
using namespace smartpaste::eval;

namespace {

struct Fixture {
  std::vector<std::vector<PlaceholderRecord>> instances;
  std::vector<Decision> decisions;
  nlohmann::json expected;
};

Fixture load() {
  const auto j = nlohmann::json::parse(testsupport::read_fixture("metrics_fixture.json"));
  Fixture f;
  for (const auto& inst : j.at("instances")) {
    std::vector<PlaceholderRecord> recs;
    for (const auto& p : inst.at("placeholders")) recs.push_back({p.at("rank").get<int>(), p.at("type_match").get<bool>()});
    f.instances.push_back(recs);
    const auto& d = inst.at("decision");
    Decision dec;
    dec.confidence = d.at("confidence").get<double>();
    dec.correct = d.at("correct").get<bool>();
    dec.choices = d.at("choices").get<int>();
    dec.expected_correct = dec.correct;
    f.decisions.push_back(dec);
  }
  f.expected = j.at("expected");
  return f;
}

double frac(const nlohmann::json& e, const char* key) {
  const auto& v = e.at(key);
  return v.at(0).get<double>() / v.at(1).get<double>();
}

std::vector<PlaceholderRecord> flat(const std::vector<std::vector<PlaceholderRecord>>& v) {
  std::vector<PlaceholderRecord> out;
  for (const auto& x : v) out.insert(out.end(), x.begin(), x.end());
  return out;
}

}  // namespace

TEST_CASE("per-placeholder reduction") {
  const auto r = reduce_per_placeholder({{1, true}, {2, true}, {1, true}, {4, false}});
  CHECK(r.accuracy == 0.5);
  CHECK(r.mrr == doctest::Approx(0.6875).epsilon(1e-15));
  CHECK(r.type_match == 0.75);
  const auto oracle = reduce_per_placeholder({{1, true}, {1, true}});
  CHECK(oracle.accuracy == 1.0);
  CHECK(oracle.mrr == 1.0);
  const auto second = reduce_per_placeholder({{2, false}, {2, true}});
  CHECK(second.accuracy == 0.0);
  CHECK(second.mrr == 0.5);
}

TEST_CASE("full-snippet reduction") {
  const auto r = reduce_full_snippet({{{1, true}, {1, true}}, {{1, true}, {2, false}}, {{3, false}, {2, true}}});
  CHECK(r.accuracy == 0.5);
  CHECK(r.exact_match == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(r.type_exact_match == doctest::Approx(1.0 / 3).epsilon(1e-15));
  // instances weigh equally
  const auto mixed = reduce_full_snippet({{{1, true}}, {{2, true}, {2, true}, {2, true}}});
  CHECK(mixed.accuracy == 0.5);
  CHECK(mixed.exact_match == 0.5);
  const auto one = reduce_full_snippet({{{1, true}, {2, true}}});
  CHECK(one.accuracy == 0.5);
  CHECK(one.exact_match == 0.0);
}

TEST_CASE("same-type PR curve") {
  SUBCASE("oracle predictor") {
    std::vector<Decision> d;
    for (int i = 0; i < 20; ++i) d.push_back({0.5 + i / 100.0, true, 1, 2});
    const auto r = reduce_same_type(d);
    CHECK(r.pr_auc == 1.0);
    CHECK(r.precision_at_10_recall == 1.0);
  }
  SUBCASE("equal confidences form one block") {
    const auto r = reduce_same_type({{0.5, true, 1, 2}, {0.5, false, 0, 2}});
    REQUIRE(r.curve.size() == 1);
    CHECK(r.curve[0].precision == 0.5);
    CHECK(r.pr_auc == 0.5);
  }
  SUBCASE("empty") { CHECK_THROWS_AS(reduce_same_type({}), NoDecisions); }
}

TEST_CASE("hand-labeled metrics fixture") {
  const auto f = load();
  const auto& e = f.expected;
  const auto pp = reduce_per_placeholder(flat(f.instances));
  const auto fs = reduce_full_snippet(f.instances);
  const auto st = reduce_same_type(f.decisions);
  CHECK(std::abs(pp.accuracy - frac(e, "per_placeholder_accuracy")) < 1e-12);
  CHECK(std::abs(pp.mrr - frac(e, "per_placeholder_mrr")) < 1e-12);
  CHECK(std::abs(pp.type_match - frac(e, "per_placeholder_type_match")) < 1e-12);
  CHECK(std::abs(fs.accuracy - frac(e, "full_snippet_accuracy")) < 1e-12);
  CHECK(std::abs(fs.mrr - frac(e, "full_snippet_mrr")) < 1e-12);
  CHECK(std::abs(fs.type_match - frac(e, "full_snippet_type_match")) < 1e-12);
  CHECK(std::abs(fs.exact_match - frac(e, "exact_match")) < 1e-12);
  CHECK(std::abs(fs.type_exact_match - frac(e, "type_exact_match")) < 1e-12);
  CHECK(std::abs(st.pr_auc - frac(e, "pr_auc")) < 1e-12);
  CHECK(std::abs(st.precision_at_10_recall - frac(e, "precision_at_10_recall")) < 1e-12);
  // precision at full recall is the same-type accuracy
  CHECK(std::abs(st.curve.back().precision - frac(e, "same_type_accuracy")) < 1e-12);
}

TEST_CASE("property: report invariants and order independence") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<PlaceholderRecord>> insts;
    std::vector<Decision> dec;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      std::vector<PlaceholderRecord> recs;
      const int k = 1 + static_cast<int>(rng() % 4);
      for (int j = 0; j < k; ++j) {
        const int rank = 1 + static_cast<int>(rng() % 4);
        recs.push_back({rank, rank == 1 || rng() % 2 == 0});
        dec.push_back({static_cast<double>(rng() % 5) / 4, rank == 1, rank == 1 ? 1.0 : 0.0, 3});
      }
      insts.push_back(recs);
    }
    const auto a = reduce_full_snippet(insts);
    CHECK(a.mrr >= a.accuracy);
    CHECK(a.exact_match <= a.accuracy + 1e-15);
    CHECK(a.type_exact_match <= a.type_match + 1e-15);
    const auto s = reduce_same_type(dec);
    CHECK(s.pr_auc >= 0);
    CHECK(s.pr_auc <= 1 + 1e-12);
    CHECK(std::abs(s.curve.back().precision - s.accuracy) < 1e-12);
    auto shuffled = insts;
    std::reverse(shuffled.begin(), shuffled.end());
    const auto b = reduce_full_snippet(shuffled);
    CHECK(b.accuracy == doctest::Approx(a.accuracy).epsilon(1e-15));
    CHECK(b.exact_match == doctest::Approx(a.exact_match).epsilon(1e-15));
    auto rd = dec;
    std::reverse(rd.begin(), rd.end());
    CHECK(reduce_same_type(rd).pr_auc == doctest::Approx(s.pr_auc).epsilon(1e-12));
  }
}

TEST_CASE("decision ties are counted fractionally") {
  taskgen::TaskInstance inst = testsupport::sum_positive_instance();
  const auto& ph = inst.placeholders[4];
  std::vector<infer::Ranked> ranked;
  for (auto c : ph.same_type_candidates) ranked.push_back({c, 0.0, 1.0 / 3});
  const auto d = decision_of(inst, 4, ranked);
  CHECK(d.choices == 3);
  CHECK(d.expected_correct == doctest::Approx(1.0 / 3));
  CHECK(d.correct == (ranked.front().symbol == ph.truth));
}

TEST_CASE("report json omits missing same-type data") {
  MetricsReport r;
  r.per_placeholder = PerPlaceholder{0.5, 0.75, 1, 4};
  const auto j = to_json(r);
  CHECK(j.at("per_placeholder").at("mrr") == 0.75);
  CHECK(j.at("same_type").is_null());
  std::ostringstream os;
  print_table(os, r);
  CHECK(os.str().find("MRR") != std::string::npos);
}
