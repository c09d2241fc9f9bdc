// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion. The exit status is non-zero when a
// criterion fails that is not listed in kKnownFailures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "smartpaste/dataflow/cfg.hpp"
#include "smartpaste/dataflow/usegraph.hpp"
#include "smartpaste/eval/metrics.hpp"
#include "smartpaste/infer/infer.hpp"
#include "smartpaste/oracle/oracle.hpp"
#include "smartpaste/taskgen/generator.hpp"
#include "smartpaste/train/train.hpp"
#include "support.hpp"

using namespace smartpaste;
using models::ContextEncoder;
using models::Variant;

namespace {

// Pinned tolerances and budgets.
constexpr int kOraclePrograms = 500;
constexpr double kOracleSeconds = 120;
constexpr int kGradSeeds = 20;
constexpr double kGradTol = 1e-4;
constexpr double kSoftmaxTol = 1e-9;
constexpr int kIcmInstances = 200;
constexpr long long kTinyAssignments = 4096;
constexpr double kIcmAgreement = 0.90;
constexpr double kTypeSepAccuracy = 0.95;
constexpr double kTypeSepSeconds = 300;
constexpr double kLoopsAccuracy = 0.75;
constexpr double kChanceBand = 0.05;
constexpr double kLoopsSeconds = 900;
constexpr double kMetricsTol = 1e-12;

// Criteria that fail with the pinned setup. Their lines still print FAIL.
// 11: the seed-1 loops Hybrid gives a type-consistent swap of the int roles a higher
// pseudo-log-likelihood than the true names, so no search recovers them.
constexpr int kKnownFailures[] = {11};

// Learning setup shared by the corpus-level criteria.
constexpr int kProjects = 5;
constexpr int kFilesPerProject = 12;
constexpr int kLoopsHidden = 32;
constexpr int kLoopsEpochs = 5;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

struct Split {
  std::vector<taskgen::TaskInstance> train, valid, test;
};

Split learning_corpus(taskgen::Profile profile) {
  taskgen::GenOptions g;
  g.seed = 1;
  g.profile = profile;
  g.projects = kProjects;
  g.files_per_project = kFilesPerProject;
  const auto files = taskgen::generate_corpus(g);
  const auto split = taskgen::split_corpus(files, 1, 0.0);
  auto collect = [&](const std::vector<std::string>& ids) {
    std::vector<taskgen::TaskInstance> out;
    for (const auto& f : files) {
      if (std::find(ids.begin(), ids.end(), f.id()) == ids.end()) continue;
      for (auto& inst : taskgen::extract_instances(minilang::compile(f.text, f.id()))) out.push_back(std::move(inst));
    }
    return out;
  };
  return {collect(split.train), collect(split.valid), collect(split.test)};
}

struct Trained {
  std::unique_ptr<models::Model> model;
  train::FitResult fit;
};

Trained train_on(const Split& s, Variant v, int hidden, int epochs, int patience, bool types = true) {
  train::TrainConfig tc;
  tc.model.variant = v;
  tc.model.hidden = tc.model.embed = hidden;
  tc.model.use_types = types;
  tc.epochs = epochs;
  tc.patience = patience;
  tc.seed = 1;
  auto m = train::init_model(tc, s.train);
  const models::Dataset tr(s.train, m->vocab(), types), va(s.valid, m->vocab(), types);
  auto r = train::fit(tc, *m, tr, va, nullptr);
  return {std::move(m), r};
}

double test_accuracy(models::Model& m, const Split& s) {
  const models::Dataset te(s.test, m.vocab(), m.config().use_types);
  return eval::eval_per_placeholder(m, te).accuracy;
}

std::vector<minilang::TypedProgram> programs(taskgen::Profile profile, std::uint64_t seed, int projects, int files) {
  taskgen::GenOptions g;
  g.seed = seed;
  g.profile = profile;
  g.projects = projects;
  g.files_per_project = files;
  g.max_statements = 12;
  std::vector<minilang::TypedProgram> out;
  for (const auto& f : taskgen::generate_corpus(g)) out.push_back(minilang::compile(f.text, f.id()));
  return out;
}

std::vector<taskgen::TaskInstance> instances(taskgen::Profile profile, std::uint64_t seed, std::size_t want,
                                             long long max_assignments) {
  std::vector<taskgen::TaskInstance> out;
  for (const auto& p : programs(profile, seed, 4, 20))
    for (auto& inst : taskgen::extract_instances(p, 30)) {
      long long n = 1;
      for (const auto& ph : inst.placeholders) n = std::min(n * static_cast<long long>(ph.candidates.size()), 1LL << 40);
      if (inst.placeholders.size() >= 2 && n <= max_assignments) out.push_back(std::move(inst));
      if (out.size() == want) return out;
    }
  return out;
}

models::ModelConfig small_cfg(Variant v, ContextEncoder e, int h) {
  models::ModelConfig c;
  c.variant = v;
  c.encoder = e;
  c.hidden = c.embed = h;
  c.min_lexeme_count = 1;
  return c;
}

constexpr Variant kVariants[] = {Variant::Loc, Variant::AvgG, Variant::GruG, Variant::GruD, Variant::Hybrid};
constexpr ContextEncoder kEncoders[] = {ContextEncoder::LogBilinear, ContextEncoder::Gru};

Outcome dataflow_oracle() {
  const auto t0 = Clock::now();
  int functions = 0, mismatches = 0, files = 0;
  std::size_t pairs = 0;
  for (const auto& p : programs(taskgen::Profile::Stress, 17, 10, 50)) {
    ++files;
    const auto binding = dataflow::program_binding(p);
    const auto cfgs = dataflow::build_cfgs(p);
    const auto oracles = oracle::oracle_dataflow(p);
    for (std::size_t k = 0; k < cfgs.size(); ++k) {
      ++functions;
      const dataflow::UseGraph g(cfgs[k], binding);
      const auto toks = g.tokens();
      std::size_t seen = 0;
      for (const auto& [key, e] : oracles[k].entries) {
        const auto [t, v] = key;
        ++seen;
        if (!std::binary_search(toks.begin(), toks.end(), t) || g.df_in(t, v) != e.df_in || g.df_out(t, v) != e.df_out)
          ++mismatches;
      }
      if (seen != toks.size() * g.symbols().size()) ++mismatches;
      pairs += seen;
    }
  }
  const double secs = seconds_since(t0);
  return {files >= kOraclePrograms && mismatches == 0 && secs < kOracleSeconds,
          std::to_string(files) + " programs, " + std::to_string(functions) + " functions, " + std::to_string(pairs) +
              " (token, symbol) pairs, " + std::to_string(mismatches) + " mismatches, " + fmt("%.1f s", secs)};
}

Outcome lexical_degeneration() {
  std::size_t checked = 0, bad = 0;
  for (const auto& p : programs(taskgen::Profile::Straight, 11, 5, 20)) {
    const auto binding = dataflow::program_binding(p);
    for (const auto& cfg : dataflow::build_cfgs(p)) {
      const dataflow::UseGraph g(cfg, binding);
      for (int t : g.tokens()) {
        if (binding[t] == minilang::kNoSymbol) continue;
        for (auto v : g.symbols()) {
          const auto lp = g.lex_prev(t, v), ln = g.lex_next(t, v);
          ++checked;
          bad += g.df_in(t, v) != dataflow::TokenSet{lp ? *lp : dataflow::kEpsilon} ||
                 g.df_out(t, v) != dataflow::TokenSet{ln ? *ln : dataflow::kEpsilon};
        }
      }
    }
  }
  return {checked > 0 && bad == 0, std::to_string(checked - bad) + "/" + std::to_string(checked) + " occurrences"};
}

Outcome gradients() {
  const std::vector<taskgen::TaskInstance> set{
      testsupport::sum_positive_instance(),
      testsupport::widest_instance("type A;\ntype B implements A;\nextern fn useA(A) -> int;\n"
                                   "int f(B b, A a, int n) {\n  int x = useA(b) + n;\n  x = x + useA(a);\n"
                                   "  return x;\n}\n")};
  const auto vocab = models::Vocab::build(set, 1);
  const models::Dataset data(set, vocab, true);
  const train::Batch batch{{0, 1}, {0, 4}, {1, 0}, {1, 2}};
  double worst = 0;
  std::string where;
  int runs = 0;
  for (auto v : kVariants)
    for (auto e : kEncoders)
      for (std::uint64_t seed = 1; seed <= kGradSeeds; ++seed) {
        models::Model m(small_cfg(v, e, 8), vocab, seed);
        auto forward = [&] {
          std::mt19937_64 rng(seed);
          nn::Tape tape;
          return tape.scalar(train::batch_loss(m, data, batch, tape, rng).loss);
        };
        auto both = [&] {
          std::mt19937_64 rng(seed);
          nn::Tape tape;
          tape.backward(train::batch_loss(m, data, batch, tape, rng).loss);
        };
        const auto r = oracle::check_gradients(m.params(), forward, both);
        ++runs;
        if (r.max_rel_err > worst) {
          worst = r.max_rel_err;
          where = std::string(models::to_string(v)) + "/" + std::string(models::to_string(e)) + " seed " +
                  std::to_string(seed) + " " + r.worst;
        }
      }
  return {worst < kGradTol, std::to_string(runs) + " runs, max relative error " + fmt("%.2e", worst) +
                                (where.empty() ? "" : " at " + where)};
}

Outcome scoring_invariants() {
  const auto insts = instances(taskgen::Profile::Mixed, 5, 60, 1LL << 40);
  const auto vocab = models::Vocab::build(insts, 1);
  double sum_err = 0;
  std::size_t argmax_flips = 0, rankings = 0, loc_pairs = 0, loc_diff = 0;
  std::uint64_t seed = 1;
  for (auto v : kVariants) {
    models::Model m(small_cfg(v, ContextEncoder::LogBilinear, 8), vocab, seed++);
    for (const auto& inst : insts) {
      const models::InstanceView view(inst, vocab, true);
      infer::Scorer s(m, view);
      const auto b = inst.truth_binding();
      for (std::size_t k = 0; k < inst.placeholders.size(); ++k) {
        const auto r = s.rank(k, b);
        double total = 0;
        for (const auto& x : r) total += x.prob;
        sum_err = std::max(sum_err, std::abs(total - 1));
        auto shifted = s.scores(k, b);
        for (auto& x : shifted) x += 1000.0;
        argmax_flips += infer::rank_scores(inst.placeholders[k].candidates, shifted).front().symbol != r.front().symbol;
        ++rankings;
      }
      if (v != Variant::Loc) continue;
      nn::Tape tape;
      models::Encoder enc(m, view, tape, false);
      for (const auto& ph : inst.placeholders)
        for (auto a : ph.candidates)
          for (auto c : ph.candidates) {
            if (a >= c || view.closure_rows(a) != view.closure_rows(c)) continue;
            ++loc_pairs;
            loc_diff += enc.usage_value(ph.token, a, b) != enc.usage_value(ph.token, c, b);
          }
    }
  }
  return {sum_err <= kSoftmaxTol && argmax_flips == 0 && loc_pairs > 0 && loc_diff == 0,
          std::to_string(rankings) + " rankings, max |sum-1| " + fmt("%.1e", sum_err) + ", " +
              std::to_string(argmax_flips) + " argmax changes under shift, Loc " +
              std::to_string(loc_pairs - loc_diff) + "/" + std::to_string(loc_pairs) + " same-closure pairs identical"};
}

Outcome icm_monotone() {
  const auto insts = instances(taskgen::Profile::Loops, 21, kIcmInstances, 1LL << 40);
  const auto vocab = models::Vocab::build(insts, 1);
  models::Model m(small_cfg(Variant::Hybrid, ContextEncoder::LogBilinear, 8), vocab, 4);
  std::size_t drops = 0, differ = 0, updates = 0;
  for (const auto& inst : insts) {
    const models::InstanceView view(inst, vocab, true);
    infer::IcmOptions o;
    o.trace = true;
    o.seed = 9;
    infer::Scorer s1(m, view), s2(m, view);
    const auto a = infer::icm(s1, o), b = infer::icm(s2, o);
    for (const auto& tr : a.trace)
      for (std::size_t k = 1; k < tr.size(); ++k) {
        ++updates;
        drops += tr[k] < tr[k - 1];
      }
    differ += a.assignment != b.assignment || a.log_prob != b.log_prob || a.trace != b.trace;
  }
  return {insts.size() == kIcmInstances && drops == 0 && differ == 0,
          std::to_string(insts.size()) + " instances, " + std::to_string(updates) + " updates, " +
              std::to_string(drops) + " decreases, " + std::to_string(differ) + " non-deterministic"};
}

/// The loops corpus and its Hybrid model, shared by criteria 6, 8, 9 and 11.
struct LoopsRun {
  Split split;
  Trained hybrid;
  double hybrid_acc = 0;
  double seconds = 0;  // corpus plus Hybrid training and evaluation
};

LoopsRun& loops() {
  static LoopsRun run = [] {
    const auto t0 = Clock::now();
    LoopsRun r;
    r.split = learning_corpus(taskgen::Profile::Loops);
    r.hybrid = train_on(r.split, Variant::Hybrid, kLoopsHidden, kLoopsEpochs, kLoopsEpochs);
    r.hybrid_acc = test_accuracy(*r.hybrid.model, r.split);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

/// Share of `insts` where ICM returns the exhaustive pseudo-likelihood maximizer.
std::size_t icm_map_agreement(models::Model& m, const std::vector<taskgen::TaskInstance>& insts,
                              const infer::IcmOptions& opts) {
  std::size_t agree = 0;
  for (const auto& inst : insts) {
    const models::InstanceView view(inst, m.vocab(), m.config().use_types);
    infer::Scorer s(m, view);
    std::vector<int> counts;
    for (const auto& p : inst.placeholders) counts.push_back(static_cast<int>(p.candidates.size()));
    auto pick = [&](const oracle::Choice& c) {
      std::vector<minilang::SymbolId> a;
      for (std::size_t k = 0; k < c.size(); ++k)
        a.push_back(inst.placeholders[k].candidates[static_cast<std::size_t>(c[k])]);
      return a;
    };
    const auto best = oracle::oracle_map(
        counts, [&](const oracle::Choice& c) { return s.pseudo_log_likelihood(infer::bind_assignment(inst, pick(c))); },
        kTinyAssignments);
    agree += infer::icm(s, opts).assignment == pick(best);
  }
  return agree;
}

std::string share(std::size_t k, std::size_t n) {
  return std::to_string(k) + "/" + std::to_string(n) + " (" +
         fmt("%.1f%%", n == 0 ? 0.0 : 100.0 * static_cast<double>(k) / static_cast<double>(n)) + ")";
}

Outcome icm_vs_map() {
  // held-out tiny instances from a differently seeded loops corpus
  const auto insts = instances(taskgen::Profile::Loops, 23, kIcmInstances, kTinyAssignments);
  auto& run = loops();
  infer::IcmOptions opts;
  const auto trained = icm_map_agreement(*run.hybrid.model, insts, opts);
  infer::IcmOptions random_only;
  random_only.greedy_first = false;
  const auto trained_random = icm_map_agreement(*run.hybrid.model, insts, random_only);
  const auto vocab = models::Vocab::build(insts, 1);
  models::Model untrained(small_cfg(Variant::Hybrid, ContextEncoder::LogBilinear, 8), vocab, 6);
  const auto fresh = icm_map_agreement(untrained, insts, opts);
  const double rate = insts.empty() ? 0 : static_cast<double>(trained) / static_cast<double>(insts.size());
  return {insts.size() == kIcmInstances && rate >= kIcmAgreement,
          "loops-trained Hybrid " + share(trained, insts.size()) + "; random starts only " +
              share(trained_random, insts.size()) + "; untrained H=8 model " + share(fresh, insts.size())};
}

Outcome typesep_learning() {
  const auto t0 = Clock::now();
  const auto s = learning_corpus(taskgen::Profile::TypeSep);
  const auto r = train_on(s, Variant::Loc, 64, 20, 3);
  const double secs = seconds_since(t0);
  return {r.fit.best_valid_accuracy >= kTypeSepAccuracy && secs < kTypeSepSeconds,
          "Loc valid accuracy " + fmt("%.1f%%", 100 * r.fit.best_valid_accuracy) + " at epoch " +
              std::to_string(r.fit.best_epoch) + ", " + fmt("%.0f s", secs)};
}


Outcome same_type_separation() {
  auto& run = loops();
  const auto t0 = Clock::now();
  auto avgg = train_on(run.split, Variant::AvgG, kLoopsHidden, kLoopsEpochs, kLoopsEpochs);
  const double avgg_acc = test_accuracy(*avgg.model, run.split);
  auto loc = train_on(run.split, Variant::Loc, kLoopsHidden, kLoopsEpochs, kLoopsEpochs);
  const models::Dataset te(run.split.test, loc.model->vocab(), true);
  const auto st = eval::eval_same_type(*loc.model, te);
  const double secs = run.seconds + seconds_since(t0);
  const bool loc_ok = st && std::abs(st->expected_accuracy - st->chance) <= kChanceBand;
  return {run.hybrid_acc >= kLoopsAccuracy && avgg_acc >= kLoopsAccuracy && loc_ok && secs < kLoopsSeconds,
          "test accuracy Hybrid " + fmt("%.1f%%", 100 * run.hybrid_acc) + ", AvgG " + fmt("%.1f%%", 100 * avgg_acc) +
              "; Loc same-type " + (st ? fmt("%.3f", st->expected_accuracy) + " vs chance " + fmt("%.3f", st->chance) +
                                             " over " + std::to_string(st->n_decisions) + " decisions"
                                       : std::string("no decisions")) +
              ", " + fmt("%.0f s", secs)};
}

Outcome ablation() {
  const auto& run = loops();
  auto untyped = train_on(run.split, Variant::Hybrid, kLoopsHidden, kLoopsEpochs, kLoopsEpochs, false);
  const double acc = test_accuracy(*untyped.model, run.split);
  return {acc < run.hybrid_acc, "Hybrid test accuracy with types " + fmt("%.2f%%", 100 * run.hybrid_acc) +
                                    ", without " + fmt("%.2f%%", 100 * acc)};
}

Outcome metrics_fixture() {
  const auto j = nlohmann::json::parse(testsupport::read_fixture("metrics_fixture.json"));
  std::vector<std::vector<eval::PlaceholderRecord>> insts;
  std::vector<eval::PlaceholderRecord> flat;
  std::vector<eval::Decision> decisions;
  for (const auto& inst : j.at("instances")) {
    std::vector<eval::PlaceholderRecord> recs;
    for (const auto& p : inst.at("placeholders")) recs.push_back({p.at("rank").get<int>(), p.at("type_match").get<bool>()});
    flat.insert(flat.end(), recs.begin(), recs.end());
    insts.push_back(recs);
    const auto& d = inst.at("decision");
    eval::Decision dec;
    dec.confidence = d.at("confidence").get<double>();
    dec.correct = d.at("correct").get<bool>();
    dec.expected_correct = dec.correct;
    dec.choices = d.at("choices").get<int>();
    decisions.push_back(dec);
  }
  const auto pp = eval::reduce_per_placeholder(flat);
  const auto fs = eval::reduce_full_snippet(insts);
  const auto st = eval::reduce_same_type(decisions);
  const auto& e = j.at("expected");
  auto frac = [&](const char* k) { return e.at(k).at(0).get<double>() / e.at(k).at(1).get<double>(); };
  const std::pair<const char*, double> got[] = {
      {"per_placeholder_accuracy", pp.accuracy},   {"per_placeholder_mrr", pp.mrr},
      {"per_placeholder_type_match", pp.type_match}, {"full_snippet_accuracy", fs.accuracy},
      {"full_snippet_mrr", fs.mrr},                 {"full_snippet_type_match", fs.type_match},
      {"exact_match", fs.exact_match},               {"type_exact_match", fs.type_exact_match},
      {"pr_auc", st.pr_auc},                         {"precision_at_10_recall", st.precision_at_10_recall},
      {"same_type_accuracy", st.curve.back().precision}};
  double worst = 0;
  for (const auto& [k, v] : got) worst = std::max(worst, std::abs(v - frac(k)));
  return {worst < kMetricsTol, std::to_string(std::size(got)) + " metrics, max error " + fmt("%.1e", worst)};
}

Outcome sum_positive() {
  const auto& run = loops();
  const auto inst = testsupport::sum_positive_instance();
  const auto& p = *inst.program;
  bool extraction = inst.placeholders.size() == 8;
  for (const auto& ph : inst.placeholders) {
    std::vector<std::string> names;
    for (auto c : ph.candidates) names.push_back(p.symbols[c].name);
    std::sort(names.begin(), names.end());
    extraction &= names == std::vector<std::string>{"arr", "i", "lim", "sum"};
  }
  // The snippet uses placeholder names; only the declaration of i is fixed.
  const std::string target = "int SumPositive(int[] arr, int lim) {\n  int sum = 0;\n  return sum;\n}\n";
  const std::string snippet = "for (int i = 0; p1 < p2; p3++)\n  if (p4[p5] > 0)\n    p6 += p7[p8];\n";
  const std::vector<std::string> truth{"i", "lim", "i", "arr", "i", "sum", "arr", "i"};
  const auto r = infer::paste(*run.hybrid.model, target, snippet, 3, 3, {});
  std::vector<std::string> chosen;
  for (const auto& ph : r.placeholders) chosen.push_back(ph.chosen);
  std::string shown;
  for (const auto& c : chosen) shown += (shown.empty() ? "" : " ") + c;
  // objective of the true names against the best ICM assignment on the extracted instance
  const models::InstanceView view(inst, run.hybrid.model->vocab(), true);
  infer::Scorer scorer(*run.hybrid.model, view);
  const double truth_pll = scorer.pseudo_log_likelihood(inst.truth_binding());
  const double icm_pll = infer::icm(scorer, {}).log_prob;
  return {extraction && chosen == truth,
          std::string("extraction ") + (extraction ? "8 placeholders over {arr, lim, sum, i}" : "wrong") +
              "; paste chose (" + shown + "); pseudo-log-likelihood of the true names " + fmt("%.4f", truth_pll) +
              ", of the ICM result " + fmt("%.4f", icm_pll)};
}

}  // namespace

int main() {
  std::vector<int> failed;
  auto report = [&](int n, const char* name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) failed.push_back(n);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << n << ". " << name << ": " << o.detail << std::endl;
  };
  report(1, "dataflow oracle equivalence", dataflow_oracle);
  report(2, "lexical degeneration", lexical_degeneration);
  report(3, "gradient correctness", gradients);
  report(4, "softmax and scoring invariants", scoring_invariants);
  report(5, "ICM monotonicity and determinism", icm_monotone);
  report(6, "ICM vs exhaustive MAP", icm_vs_map);
  report(7, "type-separable learning", typesep_learning);
  report(8, "same-type learning separation", same_type_separation);
  report(9, "type ablation direction", ablation);
  report(10, "metrics fixture", metrics_fixture);
  report(11, "sum_positive end to end", sum_positive);
  int unexpected = 0;
  std::string known;
  for (int n : failed) {
    if (std::find(std::begin(kKnownFailures), std::end(kKnownFailures), n) != std::end(kKnownFailures))
      known += (known.empty() ? "" : ", ") + std::to_string(n);
    else
      ++unexpected;
  }
  std::cout << 11 - failed.size() << "/11 criteria pass";
  if (!known.empty()) std::cout << "; known failures: " << known;
  if (unexpected > 0) std::cout << "; " << unexpected << " unexpected";
  std::cout << std::endl;
  return unexpected == 0 ? 0 : 1;
}
