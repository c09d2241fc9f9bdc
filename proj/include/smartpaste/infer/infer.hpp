// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "smartpaste/models/encoder.hpp"

namespace smartpaste::infer {

using models::Binding;
using models::Real;
using minilang::SymbolId;

struct Ranked {
  SymbolId symbol = minilang::kNoSymbol;
  Real score = 0;
  Real prob = 0;
};

/// Placeholder conditionals p(t <- v | others) normalized over each
/// placeholder's own candidates. Caches encoder results across calls, so one
/// Scorer serves a whole ICM run.
class Scorer {
 public:
  Scorer(models::Model& model, const models::InstanceView& view);

  const taskgen::TaskInstance& instance() const { return view_.instance(); }
  /// Scores of `ph`'s candidates (candidate order) with `binding` for the other placeholders.
  std::vector<Real> scores(std::size_t ph, const Binding& binding);
  /// Scores restricted to `ph`'s same-type candidates.
  std::vector<Real> same_type_scores(std::size_t ph, const Binding& binding);
  /// Candidates by descending probability; equal probabilities by ascending symbol id.
  std::vector<Ranked> rank(std::size_t ph, const Binding& binding);
  /// log p(t <- binding[t] | others) for placeholder `ph`.
  Real log_prob(std::size_t ph, const Binding& binding);
  /// Sum of log_prob over all placeholders.
  Real pseudo_log_likelihood(const Binding& binding);

 private:
  std::vector<Real> score_list(std::size_t ph, const std::vector<SymbolId>& cands, const Binding& binding);

  const models::InstanceView& view_;
  nn::Tape tape_;
  models::Encoder enc_;
};

/// Candidates sorted as by Scorer::rank, from raw scores in candidate order.
std::vector<Ranked> rank_scores(const std::vector<SymbolId>& candidates, const std::vector<Real>& scores);

/// Binding with every placeholder set to `assignment[i]`.
Binding bind_assignment(const taskgen::TaskInstance& inst, const std::vector<SymbolId>& assignment);

std::vector<Ranked> rank_single(models::Model& model, const models::InstanceView& view, std::size_t ph,
                                const Binding& context);

struct IcmOptions {
  int restarts = 5;
  int max_sweeps = 10;
  std::uint64_t seed = 1;
  bool trace = false;  // record the objective after every single-placeholder update
  /// Restart 0 starts from a left-to-right greedy pass (each placeholder takes its
  /// conditional argmax with later placeholders unbound); other restarts start uniformly
  /// at random. When false every restart starts at random.
  bool greedy_first = true;
};

struct IcmResult {
  std::vector<SymbolId> assignment;  // per placeholder
  Binding binding;
  Real log_prob = 0;  // pseudo-log-likelihood of the chosen assignment
  int best_restart = 0;
  std::vector<int> sweeps;                // per restart
  std::vector<std::vector<Real>> trace;   // per restart, when requested
};

/// Iterated conditional modes with random restarts. Each update sets one
/// placeholder to the candidate maximizing the pseudo-log-likelihood of the
/// whole assignment (ties: lowest symbol id); relations are recomputed from the
/// current binding at every evaluation.
IcmResult icm(Scorer& scorer, const IcmOptions& options);

class SpliceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NoCandidates : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PastedPlaceholder {
  int token = 0;
  int line = 0;
  int column = 0;
  std::string chosen;
  std::vector<std::pair<std::string, Real>> ranking;  // name, probability
};

struct PasteResult {
  std::string source;
  std::vector<PastedPlaceholder> placeholders;
};

/// Inserts `snippet` into `target` before 1-based LINE:COL, turns every
/// variable reference of the snippet into a placeholder, runs ICM and writes
/// the chosen names back.
PasteResult paste(models::Model& model, const std::string& target, const std::string& snippet, int line, int column,
                  const IcmOptions& options = {});

/// The instance paste() builds before inference. Placeholder truths are
/// unknown and set to the first candidate.
taskgen::TaskInstance paste_instance(const std::string& target, const std::string& snippet, int line, int column);

}  // namespace smartpaste::infer
