// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/eval/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>

#include "smartpaste/util/parallel.hpp"

namespace smartpaste::eval {

using json = nlohmann::json;

PerPlaceholder reduce_per_placeholder(const std::vector<PlaceholderRecord>& records) {
  PerPlaceholder r;
  r.placeholders = records.size();
  if (records.empty()) return r;
  for (const auto& x : records) {
    r.accuracy += x.rank == 1;
    r.mrr += 1.0 / x.rank;
    r.type_match += x.type_match;
  }
  const auto n = static_cast<double>(records.size());
  r.accuracy /= n;
  r.mrr /= n;
  r.type_match /= n;
  return r;
}

FullSnippet reduce_full_snippet(const std::vector<std::vector<PlaceholderRecord>>& instances) {
  FullSnippet r;
  r.instances = instances.size();
  for (const auto& inst : instances) {
    if (inst.empty()) continue;
    double acc = 0, mrr = 0, tm = 0;
    bool all = true, all_types = true;
    for (const auto& x : inst) {
      acc += x.rank == 1;
      mrr += 1.0 / x.rank;
      tm += x.type_match;
      all = all && x.rank == 1;
      all_types = all_types && x.type_match;
    }
    // each instance weighs the same, so exact_match <= accuracy
    const auto k = static_cast<double>(inst.size());
    r.accuracy += acc / k;
    r.mrr += mrr / k;
    r.type_match += tm / k;
    r.placeholders += inst.size();
    r.exact_match += all;
    r.type_exact_match += all_types;
  }
  if (r.instances > 0) {
    const auto n = static_cast<double>(r.instances);
    r.accuracy /= n;
    r.mrr /= n;
    r.type_match /= n;
    r.exact_match /= n;
    r.type_exact_match /= n;
  }
  return r;
}

SameType reduce_same_type(const std::vector<Decision>& decisions) {
  if (decisions.empty()) throw NoDecisions("no placeholder has two or more same-type candidates");
  SameType r;
  r.n_decisions = decisions.size();
  const auto n = static_cast<double>(decisions.size());
  for (const auto& d : decisions) {
    r.accuracy += d.correct;
    r.expected_accuracy += d.expected_correct;
    r.chance += 1.0 / d.choices;
  }
  r.accuracy /= n;
  r.expected_accuracy /= n;
  r.chance /= n;

  std::vector<std::size_t> order(decisions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return decisions[a].confidence > decisions[b].confidence; });
  std::size_t answered = 0, correct = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double conf = decisions[order[i]].confidence;
    // equal confidences enter the curve together
    for (; i < order.size() && decisions[order[i]].confidence == conf; ++i) {
      ++answered;
      correct += decisions[order[i]].correct;
    }
    r.curve.push_back({static_cast<double>(answered) / n, static_cast<double>(correct) / static_cast<double>(answered), conf});
  }
  bool found = false;
  for (const auto& p : r.curve)
    if (p.recall >= 0.1) {
      r.precision_at_10_recall = p.precision;
      found = true;
      break;
    }
  if (!found) r.precision_at_10_recall = r.curve.back().precision;
  double prev_r = 0, prev_p = r.curve.front().precision;
  for (const auto& p : r.curve) {
    r.pr_auc += (p.recall - prev_r) * (p.precision + prev_p) / 2;
    prev_r = p.recall;
    prev_p = p.precision;
  }
  return r;
}

int rank_of(const std::vector<infer::Ranked>& ranked, minilang::SymbolId truth) {
  for (std::size_t i = 0; i < ranked.size(); ++i)
    if (ranked[i].symbol == truth) return static_cast<int>(i) + 1;
  throw std::invalid_argument("truth missing from the ranking");
}

PlaceholderRecord record_of(const taskgen::TaskInstance& inst, std::size_t ph, const std::vector<infer::Ranked>& ranked) {
  const auto& p = inst.placeholders.at(ph);
  const auto& prog = *inst.program;
  return {rank_of(ranked, p.truth),
          prog.symbol(ranked.front().symbol).declared_type == prog.symbol(p.truth).declared_type};
}

Decision decision_of(const taskgen::TaskInstance& inst, std::size_t ph, const std::vector<infer::Ranked>& ranked) {
  const auto& p = inst.placeholders.at(ph);
  Decision d;
  d.confidence = ranked.front().prob;
  d.correct = ranked.front().symbol == p.truth;
  d.choices = static_cast<int>(ranked.size());
  int leaders = 0;
  bool truth_leads = false;
  for (const auto& r : ranked)
    if (r.prob == ranked.front().prob) {
      ++leaders;
      truth_leads = truth_leads || r.symbol == p.truth;
    }
  d.expected_correct = truth_leads ? 1.0 / leaders : 0.0;
  return d;
}

std::vector<std::vector<PlaceholderRecord>> predict_per_placeholder(models::Model& model, const models::Dataset& data,
                                                                    int threads) {
  std::vector<std::vector<PlaceholderRecord>> out(data.size());
  util::parallel_for(data.size(), threads, [&](std::size_t i) {
    const auto& inst = data.instance(i);
    infer::Scorer s(model, data.view(i));
    const auto b = inst.truth_binding();
    for (std::size_t k = 0; k < inst.placeholders.size(); ++k) out[i].push_back(record_of(inst, k, s.rank(k, b)));
  });
  return out;
}

PerPlaceholder eval_per_placeholder(models::Model& model, const models::Dataset& data, int threads) {
  std::vector<PlaceholderRecord> flat;
  for (auto& v : predict_per_placeholder(model, data, threads)) flat.insert(flat.end(), v.begin(), v.end());
  return reduce_per_placeholder(flat);
}

FullSnippet eval_full_snippet(models::Model& model, const models::Dataset& data, const infer::IcmOptions& icm,
                              int threads) {
  std::vector<std::vector<PlaceholderRecord>> out(data.size());
  util::parallel_for(data.size(), threads, [&](std::size_t i) {
    const auto& inst = data.instance(i);
    infer::Scorer s(model, data.view(i));
    auto opts = icm;
    opts.seed = icm.seed + i;
    const auto res = infer::icm(s, opts);
    for (std::size_t k = 0; k < inst.placeholders.size(); ++k) out[i].push_back(record_of(inst, k, s.rank(k, res.binding)));
  });
  return reduce_full_snippet(out);
}

std::optional<SameType> eval_same_type(models::Model& model, const models::Dataset& data, int threads) {
  std::vector<std::vector<Decision>> per(data.size());
  util::parallel_for(data.size(), threads, [&](std::size_t i) {
    const auto& inst = data.instance(i);
    infer::Scorer s(model, data.view(i));
    const auto b = inst.truth_binding();
    for (std::size_t k = 0; k < inst.placeholders.size(); ++k) {
      const auto& p = inst.placeholders[k];
      if (p.same_type_candidates.size() < 2) continue;
      per[i].push_back(decision_of(inst, k, infer::rank_scores(p.same_type_candidates, s.same_type_scores(k, b))));
    }
  });
  std::vector<Decision> flat;
  for (auto& v : per) flat.insert(flat.end(), v.begin(), v.end());
  if (flat.empty()) return std::nullopt;
  return reduce_same_type(flat);
}

MetricsReport evaluate(models::Model& model, const models::Dataset& data, const infer::IcmOptions& icm,
                       bool full_snippet, int threads) {
  MetricsReport r;
  r.instances = data.size();
  r.placeholders = data.placeholder_count();
  r.per_placeholder = eval_per_placeholder(model, data, threads);
  if (full_snippet) r.full_snippet = eval_full_snippet(model, data, icm, threads);
  r.same_type = eval_same_type(model, data, threads);
  return r;
}

json to_json(const MetricsReport& r) {
  json j;
  j["instances"] = r.instances;
  j["placeholders"] = r.placeholders;
  if (r.per_placeholder) {
    const auto& p = *r.per_placeholder;
    j["per_placeholder"] = {{"accuracy", p.accuracy}, {"mrr", p.mrr}, {"type_match", p.type_match}};
  }
  if (r.full_snippet) {
    const auto& f = *r.full_snippet;
    j["full_snippet"] = {{"accuracy", f.accuracy},       {"mrr", f.mrr},
                         {"exact_match", f.exact_match}, {"type_match", f.type_match},
                         {"type_exact_match", f.type_exact_match}};
  }
  if (r.same_type) {
    const auto& s = *r.same_type;
    j["same_type"] = {{"pr_auc", s.pr_auc},
                      {"precision_at_10_recall", s.precision_at_10_recall},
                      {"n_decisions", s.n_decisions},
                      {"accuracy", s.accuracy},
                      {"expected_accuracy", s.expected_accuracy},
                      {"chance", s.chance}};
  } else {
    j["same_type"] = nullptr;
  }
  return j;
}

void print_table(std::ostream& out, const MetricsReport& r) {
  auto row = [&](const char* name, double v, bool pct) {
    out << std::left << std::setw(28) << name << std::right << std::setw(10) << std::fixed << std::setprecision(pct ? 1 : 3)
        << (pct ? 100 * v : v) << '\n';
  };
  out << "instances: " << r.instances << ", placeholders: " << r.placeholders << '\n';
  if (r.per_placeholder) {
    out << "Per placeholder\n";
    row("  Accuracy (%)", r.per_placeholder->accuracy, true);
    row("  MRR", r.per_placeholder->mrr, false);
    row("  Type Match (%)", r.per_placeholder->type_match, true);
  }
  if (r.full_snippet) {
    out << "Full snippet\n";
    row("  Accuracy (%)", r.full_snippet->accuracy, true);
    row("  MRR", r.full_snippet->mrr, false);
    row("  Ex Match (%)", r.full_snippet->exact_match, true);
    row("  Type Match (%)", r.full_snippet->type_match, true);
    row("  Type Ex Match (%)", r.full_snippet->type_exact_match, true);
  }
  out << "Same type\n";
  if (r.same_type) {
    row("  PR AUC", r.same_type->pr_auc, false);
    row("  Precision@10% (%)", r.same_type->precision_at_10_recall, true);
    out << std::left << std::setw(28) << "  Decisions" << std::right << std::setw(10) << r.same_type->n_decisions << '\n';
  } else {
    out << "  (no decisions)\n";
  }
}

}  // namespace smartpaste::eval
