// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/infer/infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "smartpaste/minilang/lexer.hpp"
#include "smartpaste/minilang/parser.hpp"
#include "smartpaste/nn/kernels.hpp"
#include "smartpaste/nn/ops.hpp"

namespace smartpaste::infer {

using minilang::NodeKind;

Scorer::Scorer(models::Model& model, const models::InstanceView& view)
    : view_(view), enc_(model, view, tape_, /*training=*/false) {}

std::vector<Real> Scorer::score_list(std::size_t ph, const std::vector<SymbolId>& cands, const Binding& binding) {
  const int t = instance().placeholders.at(ph).token;
  const auto c = enc_.context_value(t);
  const auto& k = nn::kernels::active();
  std::vector<Real> out;
  out.reserve(cands.size());
  for (SymbolId v : cands) {
    const auto u = enc_.usage_value(t, v, binding);
    out.push_back(k.dot(c.data(), u.data(), c.size()));
  }
  return out;
}

std::vector<Real> Scorer::scores(std::size_t ph, const Binding& binding) {
  return score_list(ph, instance().placeholders.at(ph).candidates, binding);
}

std::vector<Real> Scorer::same_type_scores(std::size_t ph, const Binding& binding) {
  return score_list(ph, instance().placeholders.at(ph).same_type_candidates, binding);
}

std::vector<Ranked> rank_scores(const std::vector<SymbolId>& candidates, const std::vector<Real>& scores) {
  const auto probs = nn::softmax(scores);
  std::vector<Ranked> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) out.push_back({candidates[i], scores[i], probs[i]});
  std::stable_sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return a.symbol < b.symbol;
  });
  return out;
}

std::vector<Ranked> Scorer::rank(std::size_t ph, const Binding& binding) {
  return rank_scores(instance().placeholders.at(ph).candidates, scores(ph, binding));
}

Real Scorer::log_prob(std::size_t ph, const Binding& binding) {
  const auto& p = instance().placeholders.at(ph);
  const auto s = scores(ph, binding);
  const auto it = std::find(p.candidates.begin(), p.candidates.end(), binding.at(static_cast<std::size_t>(p.token)));
  if (it == p.candidates.end()) throw std::invalid_argument("binding assigns a non-candidate");
  const Real m = *std::max_element(s.begin(), s.end());
  Real z = 0;
  for (Real x : s) z += std::exp(x - m);
  return s[static_cast<std::size_t>(it - p.candidates.begin())] - m - std::log(z);
}

Real Scorer::pseudo_log_likelihood(const Binding& binding) {
  Real total = 0;
  for (std::size_t i = 0; i < instance().placeholders.size(); ++i) total += log_prob(i, binding);
  return total;
}

Binding bind_assignment(const taskgen::TaskInstance& inst, const std::vector<SymbolId>& assignment) {
  if (assignment.size() != inst.placeholders.size()) throw std::invalid_argument("assignment size mismatch");
  Binding b;
  b.reserve(inst.program->tokens.size());
  for (const auto& t : inst.program->tokens) b.push_back(t.symbol);
  for (std::size_t i = 0; i < assignment.size(); ++i)
    b[static_cast<std::size_t>(inst.placeholders[i].token)] = assignment[i];
  return b;
}

std::vector<Ranked> rank_single(models::Model& model, const models::InstanceView& view, std::size_t ph,
                                const Binding& context) {
  Scorer s(model, view);
  return s.rank(ph, context);
}

IcmResult icm(Scorer& scorer, const IcmOptions& options) {
  const auto& inst = scorer.instance();
  const auto& phs = inst.placeholders;
  if (phs.empty()) throw std::invalid_argument("icm: instance has no placeholders");
  if (options.restarts < 1 || options.max_sweeps < 1) throw std::invalid_argument("icm: restarts and sweeps must be positive");
  std::mt19937_64 rng(options.seed);
  IcmResult best;
  best.log_prob = -std::numeric_limits<Real>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    std::vector<SymbolId> a;
    Binding b;
    if (r == 0 && options.greedy_first) {
      b = inst.truth_binding();
      for (const auto& p : phs) b[static_cast<std::size_t>(p.token)] = minilang::kNoSymbol;
      for (std::size_t i = 0; i < phs.size(); ++i) {
        const auto s = scorer.scores(i, b);
        const auto top = std::max_element(s.begin(), s.end()) - s.begin();
        a.push_back(phs[i].candidates[static_cast<std::size_t>(top)]);
        b[static_cast<std::size_t>(phs[i].token)] = a.back();
      }
    } else {
      for (const auto& p : phs) {
        const auto n = p.candidates.size();
        a.push_back(p.candidates[std::min(n - 1, static_cast<std::size_t>(nn::uniform01(rng) * static_cast<Real>(n)))]);
      }
      b = bind_assignment(inst, a);
    }
    Real current = scorer.pseudo_log_likelihood(b);
    std::vector<Real> trace;
    int sweeps = 0;
    for (bool changed = true; changed && sweeps < options.max_sweeps; ++sweeps) {
      changed = false;
      for (std::size_t i = 0; i < phs.size(); ++i) {
        const auto tok = static_cast<std::size_t>(phs[i].token);
        const SymbolId before = b[tok];
        SymbolId arg = before;
        Real best_val = -std::numeric_limits<Real>::infinity();
        for (SymbolId v : phs[i].candidates) {
          b[tok] = v;
          const Real val = v == before ? current : scorer.pseudo_log_likelihood(b);
          if (val > best_val || (val == best_val && v < arg)) {
            best_val = val;
            arg = v;
          }
        }
        b[tok] = arg;
        a[i] = arg;
        current = best_val;
        if (arg != before) changed = true;
        if (options.trace) trace.push_back(current);
      }
    }
    best.sweeps.push_back(sweeps);
    if (options.trace) best.trace.push_back(std::move(trace));
    if (current > best.log_prob) {
      best.log_prob = current;
      best.assignment = a;
      best.binding = b;
      best.best_restart = r;
    }
  }
  return best;
}

namespace {

std::size_t byte_offset(const std::string& text, int line, int column) {
  if (line < 1 || column < 1) throw SpliceError("insertion point must be 1-based LINE:COL");
  std::size_t off = 0;
  for (int l = 1; l < line; ++l) {
    off = text.find('\n', off);
    if (off == std::string::npos) throw SpliceError("insertion line " + std::to_string(line) + " is past the end");
    ++off;
  }
  for (int c = 1; c < column; ++c) {
    if (off >= text.size() || text[off] == '\n')
      throw SpliceError("insertion column " + std::to_string(column) + " is past the end of the line");
    ++off;
    while (off < text.size() && (static_cast<unsigned char>(text[off]) & 0xC0) == 0x80) ++off;
  }
  return off;
}

}  // namespace

taskgen::TaskInstance paste_instance(const std::string& target, const std::string& snippet, int line, int column) {
  const auto off = byte_offset(target, line, column);
  std::string body = snippet;
  if (body.empty() || !std::isspace(static_cast<unsigned char>(body.back()))) body += '\n';
  minilang::TokenStream snip;
  try {
    snip = minilang::tokenize(body);
    minilang::parse_statements(snip.tokens);
  } catch (const minilang::SourceError& e) {
    throw SpliceError(std::string("snippet is not a statement sequence: ") + e.what());
  }
  const std::string spliced = target.substr(0, off) + body + target.substr(off);
  minilang::TokenStream all;
  minilang::Ast ast;
  int lo = 0;
  try {
    lo = static_cast<int>(minilang::tokenize(target.substr(0, off)).tokens.size());
    all = minilang::tokenize(spliced);
    ast = minilang::parse(all.tokens);
  } catch (const minilang::SourceError& e) {
    throw SpliceError(std::string("spliced program does not parse: ") + e.what());
  }
  const int hi = lo + static_cast<int>(snip.tokens.size());
  for (int t = lo; t < hi; ++t)
    if (t >= static_cast<int>(all.tokens.size()) || all.tokens[static_cast<std::size_t>(t)].text != snip.tokens[static_cast<std::size_t>(t - lo)].text)
      throw SpliceError("insertion point splits a token");
  minilang::CheckOptions opts;
  for (const auto& n : ast.nodes)
    if (n.kind == NodeKind::VarRef && n.name_token >= lo && n.name_token < hi) opts.holes.push_back(n.name_token);
  std::sort(opts.holes.begin(), opts.holes.end());
  std::shared_ptr<minilang::TypedProgram> program;
  try {
    program = std::make_shared<minilang::TypedProgram>(minilang::compile(spliced, "<paste>", opts));
  } catch (const minilang::SourceError& e) {
    throw SpliceError(std::string("spliced program does not check: ") + e.what());
  }
  if (hi > lo && program->function_of_token[static_cast<std::size_t>(lo)] == minilang::kNoNode)
    throw SpliceError("insertion point is outside every function body");
  taskgen::TaskInstance inst;
  inst.program_id = "<paste>";
  inst.snippet_span = {lo, hi};
  for (int t : opts.holes) {
    taskgen::Placeholder p;
    p.token = t;
    p.candidates = minilang::vars_in_scope(*program, t);
    if (p.candidates.empty())
      throw NoCandidates("no variable in scope for '" + program->tokens[static_cast<std::size_t>(t)].text + "' at line " +
                         std::to_string(program->tokens[static_cast<std::size_t>(t)].line));
    p.truth = p.candidates.front();
    const auto ty = program->symbol(p.truth).declared_type;
    for (SymbolId c : p.candidates)
      if (program->symbol(c).declared_type == ty) p.same_type_candidates.push_back(c);
    inst.placeholders.push_back(std::move(p));
  }
  inst.program = std::move(program);
  return inst;
}

PasteResult paste(models::Model& model, const std::string& target, const std::string& snippet, int line, int column,
                  const IcmOptions& options) {
  const auto inst = paste_instance(target, snippet, line, column);
  const auto& prog = *inst.program;
  auto tokens = prog.tokens;
  PasteResult out;
  if (!inst.placeholders.empty()) {
    const models::InstanceView view(inst, model.vocab(), model.config().use_types);
    Scorer scorer(model, view);
    const auto res = icm(scorer, options);
    for (std::size_t i = 0; i < inst.placeholders.size(); ++i) {
      const auto& ph = inst.placeholders[i];
      auto& tok = tokens[static_cast<std::size_t>(ph.token)];
      PastedPlaceholder rep;
      rep.token = ph.token;
      rep.line = tok.line;
      rep.column = tok.column;
      rep.chosen = prog.symbol(res.assignment[i]).name;
      for (const auto& r : scorer.rank(i, res.binding)) rep.ranking.emplace_back(prog.symbol(r.symbol).name, r.prob);
      tok.text = rep.chosen;
      out.placeholders.push_back(std::move(rep));
    }
  }
  for (const auto& t : tokens) out.source += t.leading + t.text;
  out.source += prog.trailing;
  return out;
}

}  // namespace smartpaste::infer
