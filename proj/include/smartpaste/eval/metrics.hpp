// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "smartpaste/infer/infer.hpp"

namespace smartpaste::eval {

class NoDecisions : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Outcome of one placeholder prediction.
struct PlaceholderRecord {
  int rank = 1;             // 1-based rank of the truth
  bool type_match = false;  // top-1 has the truth's declared type
};

/// One same-type decision: top-1 probability within the same-type candidates.
struct Decision {
  double confidence = 0;
  bool correct = false;
  double expected_correct = 0;  // 1/m when the truth is one of m tied leaders, else 0
  int choices = 0;              // number of same-type candidates
};

struct PerPlaceholder {
  double accuracy = 0;
  double mrr = 0;
  double type_match = 0;
  std::size_t placeholders = 0;
};

struct FullSnippet {
  double accuracy = 0;
  double mrr = 0;
  double exact_match = 0;
  double type_match = 0;
  double type_exact_match = 0;
  std::size_t instances = 0;
  std::size_t placeholders = 0;
};

struct PrPoint {
  double recall = 0;
  double precision = 0;
  double threshold = 0;
};

struct SameType {
  double pr_auc = 0;
  double precision_at_10_recall = 0;
  double accuracy = 0;           // top-1 with lowest-id tie-break
  double expected_accuracy = 0;  // ties resolved uniformly at random
  double chance = 0;             // mean of 1/k
  std::size_t n_decisions = 0;
  std::vector<PrPoint> curve;
};

struct MetricsReport {
  std::optional<PerPlaceholder> per_placeholder;
  std::optional<FullSnippet> full_snippet;
  std::optional<SameType> same_type;
  std::size_t instances = 0;
  std::size_t placeholders = 0;
};

// -- reducers over prediction records
PerPlaceholder reduce_per_placeholder(const std::vector<PlaceholderRecord>& records);
FullSnippet reduce_full_snippet(const std::vector<std::vector<PlaceholderRecord>>& instances);
/// Throws NoDecisions on an empty list.
SameType reduce_same_type(const std::vector<Decision>& decisions);

/// 1-based rank of `truth` in a ranked list.
int rank_of(const std::vector<infer::Ranked>& ranked, minilang::SymbolId truth);
PlaceholderRecord record_of(const taskgen::TaskInstance& inst, std::size_t ph, const std::vector<infer::Ranked>& ranked);
Decision decision_of(const taskgen::TaskInstance& inst, std::size_t ph, const std::vector<infer::Ranked>& ranked);

// -- model evaluation; `threads` workers split the instances
std::vector<std::vector<PlaceholderRecord>> predict_per_placeholder(models::Model& model, const models::Dataset& data,
                                                                    int threads = 1);
PerPlaceholder eval_per_placeholder(models::Model& model, const models::Dataset& data, int threads = 1);
FullSnippet eval_full_snippet(models::Model& model, const models::Dataset& data, const infer::IcmOptions& icm,
                              int threads = 1);
/// Empty when no placeholder has two or more same-type candidates.
std::optional<SameType> eval_same_type(models::Model& model, const models::Dataset& data, int threads = 1);
MetricsReport evaluate(models::Model& model, const models::Dataset& data, const infer::IcmOptions& icm,
                       bool full_snippet = true, int threads = 1);

nlohmann::json to_json(const MetricsReport& r);
/// Human-readable table, one metric per row.
void print_table(std::ostream& out, const MetricsReport& r);

}  // namespace smartpaste::eval
