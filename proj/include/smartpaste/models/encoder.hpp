// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <random>
#include <vector>

#include "smartpaste/dataflow/usegraph.hpp"
#include "smartpaste/models/model.hpp"

namespace smartpaste::models {

using minilang::SymbolId;
using nn::Real;
using nn::Var;

/// Symbol per token of the instance's program; placeholders hold their
/// current assignment.
using Binding = std::vector<SymbolId>;

/// Assignment-independent facts about one instance, shared by every encoder
/// run over it.
class InstanceView {
 public:
  InstanceView(const taskgen::TaskInstance& inst, const Vocab& vocab, bool use_types);

  const taskgen::TaskInstance& instance() const { return *inst_; }
  const minilang::TypedProgram& program() const { return *inst_->program; }
  const dataflow::Cfg& cfg() const { return *cfg_; }
  /// Token-embedding row for non-variable tokens, -1 for variable tokens.
  int token_row(int t) const { return rows_[static_cast<std::size_t>(t)]; }
  /// Type-embedding rows of the supertype closure of v (deduplicated, ascending).
  const std::vector<int>& closure_rows(SymbolId v) const { return closures_.at(static_cast<std::size_t>(v)); }
  /// Occurrences of v inside the snippet's function under `binding`, plus `extra` if >= 0.
  std::vector<int> occurrences(const Binding& binding, SymbolId v, int extra) const;

 private:
  const taskgen::TaskInstance* inst_;
  std::shared_ptr<const dataflow::Cfg> cfg_;
  std::vector<int> rows_;
  std::vector<std::vector<int>> closures_;
};

/// Instances paired with their views. Views point into the instance list, so
/// a Dataset is move-only.
class Dataset {
 public:
  Dataset(std::vector<taskgen::TaskInstance> instances, const Vocab& vocab, bool use_types);
  Dataset(Dataset&&) = default;
  Dataset& operator=(Dataset&&) = default;

  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  const taskgen::TaskInstance& instance(std::size_t i) const { return instances_.at(i); }
  const InstanceView& view(std::size_t i) const { return *views_.at(i); }
  const std::vector<taskgen::TaskInstance>& instances() const { return instances_; }
  std::size_t placeholder_count() const;

 private:
  std::vector<taskgen::TaskInstance> instances_;
  std::vector<std::unique_ptr<InstanceView>> views_;
};

/// Builds c(t) and u(t, v) on a tape. In training mode type embeddings use
/// random closure subsets (one draw per symbol per encoder). In evaluation
/// mode use `usage_value` / `context_value`, which cache results as plain
/// vectors and keep the tape short.
class Encoder {
 public:
  Encoder(Model& model, const InstanceView& view, nn::Tape& tape, bool training, std::mt19937_64* rng = nullptr);

  Var type_embed(SymbolId v);
  Var context(int t);
  Var usage(int t, SymbolId v, const Binding& binding);
  Var score(Var context, Var usage) { return tape_.dot(context, usage); }

  std::vector<Real> context_value(int t);
  std::vector<Real> usage_value(int t, SymbolId v, const Binding& binding);

  nn::Tape& tape() { return tape_; }
  const Model& model() const { return model_; }

 private:
  struct FlowEntry {
    dataflow::VarFlow flow;
    std::map<std::pair<int, int>, Var> tree[2];  // (token, depth) -> state, per direction
  };
  Var token_repr(int t);
  Var avg_usage(int t, SymbolId v, const FlowEntry& f);
  Var gru_usage(int t, SymbolId v, const FlowEntry& f);
  Var tree_usage(int t, SymbolId v, FlowEntry& f);
  Var tree_state(SymbolId v, FlowEntry& f, dataflow::Direction d, int token, int depth);
  FlowEntry& flow_for(SymbolId v, const std::vector<int>& occ);
  void reset_tape();

  Model& model_;
  const InstanceView& view_;
  nn::Tape& tape_;
  bool training_;
  std::mt19937_64* rng_;
  std::map<SymbolId, std::vector<int>> type_rows_;  // sampled closure rows per symbol
  std::map<SymbolId, Var> type_vars_;
  std::map<int, Var> ctx_vars_;
  std::map<std::pair<SymbolId, std::vector<int>>, FlowEntry> flows_;
  std::map<int, std::vector<Real>> ctx_values_;
  std::map<std::pair<std::pair<int, SymbolId>, std::vector<int>>, std::vector<Real>> usage_values_;
};

}  // namespace smartpaste::models
