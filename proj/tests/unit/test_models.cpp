// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "smartpaste/models/encoder.hpp"
#include "smartpaste/taskgen/generator.hpp"
#include "support.hpp"

using namespace smartpaste;
using namespace smartpaste::models;
using nn::Tensor;
using testsupport::symbol_named;

namespace {

const char* kTyped = R"(type A;
type B implements A;
type X;
extern fn useA(A) -> int;
int f(B b, A a) {
  int x = useA(b);
  x = x + useA(a);
  return x;
}
)";

ModelConfig small(Variant v, int h = 2) {
  ModelConfig c;
  c.variant = v;
  c.hidden = c.embed = h;
  c.min_lexeme_count = 1;
  return c;
}

std::vector<Real> values(nn::Tape& tape, Var v) {
  auto s = tape.value(v);
  return {s.begin(), s.end()};
}

void set_row(Tensor& t, int row, std::vector<Real> v) { std::copy(v.begin(), v.end(), t.row(static_cast<std::size_t>(row)).begin()); }

void check_close(const std::vector<Real>& a, const std::vector<Real>& b, double tol = 1e-12) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(tol));
}

}  // namespace

TEST_CASE("type embedding pools the supertype closure") {
  const auto inst = testsupport::widest_instance(kTyped);
  const auto vocab = Vocab::build({inst}, 1);
  Model m(small(Variant::Loc), vocab, 1);
  set_row(*m.type_embedding, vocab.type("A"), {1, -2});
  set_row(*m.type_embedding, vocab.type("B"), {0, 3});
  const InstanceView view(inst, vocab, true);
  const auto& p = *inst.program;
  nn::Tape tape;
  Encoder enc(m, view, tape, false);
  check_close(values(tape, enc.type_embed(symbol_named(p, "a"))), {1, -2});
  check_close(values(tape, enc.type_embed(symbol_named(p, "b"))), {1, 3});

  SUBCASE("training draws a non-empty subset") {
    int seen_a = 0, seen_b = 0, seen_both = 0;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      std::mt19937_64 rng(seed);
      nn::Tape t;
      Encoder e(m, view, t, true, &rng);
      const auto v = values(t, e.type_embed(symbol_named(p, "b")));
      CHECK(v[0] >= 0);
      CHECK(v[1] >= -2);
      if (v == std::vector<Real>{1, -2}) ++seen_a;
      else if (v == std::vector<Real>{0, 3}) ++seen_b;
      else if (v == std::vector<Real>{1, 3}) ++seen_both;
      else FAIL("unexpected pooled vector");
      // one draw per symbol and encoder
      CHECK(values(t, e.type_embed(symbol_named(p, "b"))) == v);
    }
    CHECK(seen_a > 0);
    CHECK(seen_b > 0);
    CHECK(seen_both > 0);
  }

  SUBCASE("types missing from the vocabulary use UnkType") {
    const auto other = testsupport::widest_instance("type Q;\nint g(Q q, int n) { int k = n; return k; }\n");
    const InstanceView ov(other, vocab, true);
    CHECK(ov.closure_rows(symbol_named(*other.program, "q")) == std::vector<int>{Vocab::kUnkType});
    CHECK(vocab.type("X") != Vocab::kUnkType);
  }

  SUBCASE("without types every variable is UnkType") {
    const InstanceView nv(inst, vocab, false);
    for (const auto& s : p.symbols) CHECK(nv.closure_rows(s.id) == std::vector<int>{Vocab::kUnkType});
  }
}

TEST_CASE("context of epsilon is zero and windows outside the file are PAD") {
  const auto inst = testsupport::sum_positive_instance();
  const auto vocab = Vocab::build({inst}, 1);
  Model m(small(Variant::Loc, 3), vocab, 4);
  const InstanceView view(inst, vocab, true);
  nn::Tape tape;
  Encoder enc(m, view, tape, false);
  check_close(values(tape, enc.context(dataflow::kEpsilon)), {0, 0, 0});
  // identity positional maps and a zero PAD row: a fully padded window gives zero
  for (auto* a : m.ctx_prev_a) std::fill(a->data.begin(), a->data.end(), 0.0);
  for (auto* a : m.ctx_next_a) {
    std::fill(a->data.begin(), a->data.end(), 0.0);
    for (int i = 0; i < 3; ++i) a->data[static_cast<std::size_t>(i * 3 + i)] = 1;
  }
  set_row(*m.token_embedding, Vocab::kPad, {0, 0, 0});
  nn::Tape t2;
  Encoder e2(m, view, t2, false);
  const int last = static_cast<int>(inst.program->tokens.size()) - 1;
  check_close(values(t2, e2.context(last)), {0, 0, 0});
}

TEST_CASE("Loc cannot separate same-type candidates") {
  const auto inst = testsupport::sum_positive_instance();
  const auto vocab = Vocab::build({inst}, 1);
  Model m(small(Variant::Loc, 8), vocab, 2);
  const InstanceView view(inst, vocab, true);
  nn::Tape tape;
  Encoder enc(m, view, tape, false);
  const auto& p = *inst.program;
  const int l8 = inst.placeholders[4].token;
  const auto b = inst.truth_binding();
  const auto ui = enc.usage_value(l8, symbol_named(p, "i"), b);
  CHECK(ui == enc.usage_value(l8, symbol_named(p, "sum"), b));
  CHECK(ui == enc.usage_value(l8, symbol_named(p, "lim"), b));
  CHECK(ui != enc.usage_value(l8, symbol_named(p, "arr"), b));
}

TEST_CASE("AvgG adds the mean chain context to the type embedding") {
  SUBCASE("arithmetic") {
    nn::Tape tape;
    const Real te[] = {1, 1}, c1[] = {2, 0}, c2[] = {0, 2};
    const Var ctx[] = {tape.constant(c1), tape.constant(c2)};
    check_close(values(tape, tape.add(tape.constant(te), tape.mean(ctx))), {2, 2});
  }
  SUBCASE("on a program with chain length 1") {
    const auto inst = testsupport::widest_instance("int h(int a) { int b = a; int c = a; return a + b + c; }");
    const auto vocab = Vocab::build({inst}, 1);
    auto cfg = small(Variant::AvgG, 4);
    cfg.chain = 1;
    Model m(cfg, vocab, 3);
    const InstanceView view(inst, vocab, true);
    nn::Tape tape;
    Encoder enc(m, view, tape, false);
    const auto& p = *inst.program;
    const auto a = symbol_named(p, "a");
    std::vector<int> uses;
    for (const auto& ph : inst.placeholders)
      if (ph.truth == a) uses.push_back(ph.token);
    REQUIRE(uses.size() == 3);
    const auto u = values(tape, enc.usage(uses[1], a, inst.truth_binding()));
    const auto te = values(tape, enc.type_embed(a));
    const auto ca = values(tape, enc.context(uses[0]));
    const auto cb = values(tape, enc.context(uses[2]));
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == doctest::Approx(te[i] + (ca[i] + cb[i]) / 2));
  }
}

TEST_CASE("GruD on straight-line code is a sequence GRU") {
  const auto inst = testsupport::widest_instance(
      "int g(int a, int b) {\n  int s = a;\n  s = s + b;\n  s = s * a;\n  return s;\n}\n");
  const auto vocab = Vocab::build({inst}, 1);
  const auto& p = *inst.program;
  const auto s = symbol_named(p, "s");
  std::vector<int> occ;
  for (const auto& t : p.tokens)
    if (t.symbol == s || (p.holes[t.index] && inst.placeholders[inst.index_of(t.index)].truth == s)) occ.push_back(t.index);
  REQUIRE(occ.size() == 6);
  const int t = occ.back();
  for (int depth : {15, 2}) {
    CAPTURE(depth);
    auto cfg = small(Variant::GruD, 4);
    cfg.depth = depth;
    Model m(cfg, vocab, 5);
    const InstanceView view(inst, vocab, true);
    nn::Tape tape;
    Encoder enc(m, view, tape, false);
    const Var u = enc.usage(t, s, inst.truth_binding());
    const Var te = enc.type_embed(s);
    // prev side: the chain back to the declaration, then the epsilon input
    std::vector<Var> inputs{enc.context(dataflow::kEpsilon)};
    for (std::size_t k = 0; k + 1 < occ.size(); ++k) inputs.push_back(enc.context(occ[k]));
    const std::size_t keep = std::min<std::size_t>(inputs.size(), static_cast<std::size_t>(depth));
    Var hp = te;
    for (std::size_t k = inputs.size() - keep; k < inputs.size(); ++k) hp = nn::gru_step(tape, m.tree_prev_gru, inputs[k], hp);
    const Var hn = nn::gru_step(tape, m.tree_next_gru, enc.context(dataflow::kEpsilon), te);
    const Var expect = tape.linear(*m.tree_w, tape.concat(hp, hn));
    check_close(values(tape, u), values(tape, expect), 1e-12);
  }
}

TEST_CASE("score is the inner product") {
  nn::Tape tape;
  const Real c[] = {1, 2}, u[] = {3, -1}, z[] = {0, 0};
  CHECK(tape.scalar(tape.dot(tape.constant(c), tape.constant(u))) == 1.0);
  CHECK(tape.scalar(tape.dot(tape.constant(c), tape.constant(z))) == 0.0);
}

TEST_CASE("property: every variant gives finite usage vectors on generated instances") {
  taskgen::GenOptions g;
  g.seed = 7;
  g.projects = 2;
  g.files_per_project = 2;
  std::vector<taskgen::TaskInstance> insts;
  for (const auto& f : taskgen::generate_corpus(g)) {
    auto more = taskgen::extract_instances(minilang::compile(f.text, f.id()));
    for (std::size_t i = 0; i < more.size(); i += 7) insts.push_back(std::move(more[i]));
  }
  REQUIRE(insts.size() > 10);
  const auto vocab = Vocab::build(insts, 2);
  for (auto v : {Variant::Loc, Variant::AvgG, Variant::GruG, Variant::GruD, Variant::Hybrid})
    for (auto e : {ContextEncoder::LogBilinear, ContextEncoder::Gru}) {
      auto cfg = small(v, 8);
      cfg.encoder = e;
      Model m(cfg, vocab, 11);
      std::size_t checked = 0;
      for (std::size_t i = 0; i < insts.size(); i += 3) {
        const InstanceView view(insts[i], vocab, true);
        nn::Tape tape;
        Encoder enc(m, view, tape, false);
        const auto b = insts[i].truth_binding();
        for (const auto& ph : insts[i].placeholders)
          for (auto c : ph.candidates) {
            for (Real x : enc.usage_value(ph.token, c, b)) REQUIRE(std::isfinite(x));
            ++checked;
          }
      }
      CHECK(checked > 0);
    }
}

TEST_CASE("usage is a pure function of the parameters") {
  const auto inst = testsupport::sum_positive_instance();
  const auto vocab = Vocab::build({inst}, 1);
  Model m(small(Variant::Hybrid, 6), vocab, 9);
  const InstanceView view(inst, vocab, true);
  const auto b = inst.truth_binding();
  std::vector<std::vector<Real>> first;
  for (int run = 0; run < 2; ++run) {
    nn::Tape tape;
    Encoder enc(m, view, tape, false);
    for (const auto& ph : inst.placeholders) {
      auto u = enc.usage_value(ph.token, ph.truth, b);
      if (run == 0) first.push_back(u);
      else CHECK(u == first[static_cast<std::size_t>(&ph - inst.placeholders.data())]);
    }
  }
}

TEST_CASE("config parsing") {
  CHECK(variant_from_string("grud") == Variant::GruD);
  CHECK_THROWS_AS(variant_from_string("lstm"), VariantError);
  CHECK(encoder_from_string("gru") == ContextEncoder::Gru);
  ModelConfig c;
  c.embed = 32;
  CHECK_THROWS(c.validate());
  c.embed = 64;
  c.variant = Variant::GruG;
  const auto back = model_config_from_json(to_json(c));
  CHECK(back.variant == Variant::GruG);
  CHECK(back.depth == 15);
  CHECK(back.chain == 14);
  CHECK(back.window == 3);
}
