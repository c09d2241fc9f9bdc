// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "smartpaste/oracle/oracle.hpp"
#include "support.hpp"

using namespace smartpaste;
using dataflow::kEpsilon;
using dataflow::TokenSet;
using minilang::compile;
using testsupport::occurrence;
using testsupport::symbol_named;

namespace {

const oracle::OracleEntry& at(const oracle::OracleUses& u, int t, minilang::SymbolId v) {
  return u.entries.at({t, v});
}

}  // namespace

TEST_CASE("oracle on straight-line code equals lexical order") {
  const auto p = compile("void f() { int x = 1; x++; int y = x; }");
  const auto u = oracle::oracle_dataflow(p)[0];
  CHECK(u.paths == 1);
  const auto x = symbol_named(p, "x");
  CHECK(at(u, occurrence(p, 1), x).df_in == TokenSet{occurrence(p, 0)});
  CHECK(at(u, occurrence(p, 1), x).df_out == TokenSet{occurrence(p, 3)});
  CHECK(at(u, occurrence(p, 0), x).df_in == TokenSet{kEpsilon});
}

TEST_CASE("oracle: sum_positive at bound 2") {
  const auto p = compile(testsupport::read_fixture("sum_positive.ml0"));
  oracle::OracleOptions opt;
  opt.loop_bound = 2;
  const auto u = oracle::oracle_dataflow(p, opt)[0];
  CHECK(at(u, occurrence(p, 8), symbol_named(p, "sum")).df_in == TokenSet{occurrence(p, 2), occurrence(p, 9)});
  // 0 iterations, 1 iteration (2 ways), 2 iterations (4 ways)
  CHECK(u.paths == 7);
}

TEST_CASE("oracle: if/else join sees both branch uses") {
  const auto p = compile("void f(bool b, int x) { if (b) { x = 1; } else { x = 2; } x++; }");
  const auto u = oracle::oracle_dataflow(p)[0];
  CHECK(u.paths == 2);
  CHECK(at(u, occurrence(p, 5), symbol_named(p, "x")).df_in == TokenSet{occurrence(p, 3), occurrence(p, 4)});
}

TEST_CASE("oracle sets grow with the loop bound") {
  const auto p = compile(
      "int f(int a, int b) { int s = 0; while (a < b) { if (s < 3) { s += a; } else { b--; } a++; } return s; }");
  oracle::OracleUses prev;
  for (int k = 0; k <= 4; ++k) {
    oracle::OracleOptions opt;
    opt.loop_bound = k;
    const auto u = oracle::oracle_dataflow(p, opt)[0];
    for (const auto& [key, e] : prev.entries) {
      const auto& cur = u.entries.at(key);
      CHECK(std::includes(cur.df_in.begin(), cur.df_in.end(), e.df_in.begin(), e.df_in.end()));
      CHECK(std::includes(cur.df_out.begin(), cur.df_out.end(), e.df_out.begin(), e.df_out.end()));
    }
    prev = u;
  }
}

TEST_CASE("oracle path cap") {
  const auto p = compile("void f(int a) { while (a < 1) { if (a < 2) { a++; } while (a < 3) { if (a < 4) { a--; } } } }");
  oracle::OracleOptions opt;
  opt.max_paths = 50;
  CHECK_THROWS_AS(oracle::oracle_dataflow(p, opt), oracle::PathExplosion);
}

TEST_CASE("oracle_map picks the best assignment with lexicographic ties") {
  const auto best = oracle::oracle_map({2, 2}, [](const oracle::Choice& c) { return c[0] == 1 && c[1] == 0 ? 1.0 : 0.0; });
  CHECK(best == oracle::Choice{1, 0});
  CHECK(oracle::oracle_map({3}, [](const oracle::Choice&) { return 0.0; }) == oracle::Choice{0});
  CHECK_THROWS_AS(oracle::oracle_map({100, 100}, [](const oracle::Choice&) { return 0.0; }), oracle::TooLarge);
}

TEST_CASE("finite differences") {
  nn::Tensor w("w", {1});
  w.data[0] = 3;
  const auto g = oracle::finite_diff_grad([&] { return w.data[0] * w.data[0]; }, w);
  CHECK(std::abs(g[0] - 6) < 1e-8);
  nn::Tensor c("c", {3});
  for (double x : oracle::finite_diff_grad([] { return 2.5; }, c)) CHECK(x == 0.0);
}

TEST_CASE("gradient check shrinks the step across a kink but still rejects wrong gradients") {
  nn::ParamStore ps;
  nn::Tensor& w = ps.add("w", {1});
  w.data[0] = 3e-6;  // the relu switch lies inside the default step
  auto f = [&] { return std::max(w.data[0], 0.0); };
  auto right = [&] { w.grad[0] = w.data[0] > 0 ? 1.0 : 0.0; };
  CHECK(oracle::check_gradients(ps, f, right, 1e-5, 1e-3, 1e-5, 0).max_rel_err > 0.3);
  CHECK(oracle::check_gradients(ps, f, right).max_rel_err < 1e-9);
  auto wrong = [&] { w.grad[0] = 0.9; };
  CHECK(oracle::check_gradients(ps, f, wrong).max_rel_err > 0.09);
}
