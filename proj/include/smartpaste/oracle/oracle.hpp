// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smartpaste/dataflow/usegraph.hpp"
#include "smartpaste/nn/tensor.hpp"

namespace smartpaste::oracle {

using dataflow::TokenSet;
using minilang::SymbolId;

class PathExplosion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleEntry {
  TokenSet df_in;
  TokenSet df_out;
};

/// Brute-force relations for one function: (token, symbol) -> sets, for every
/// token executed on some path and every symbol occurring in the function.
struct OracleUses {
  std::map<std::pair<int, SymbolId>, OracleEntry> entries;
  long long paths = 0;
};

struct OracleOptions {
  int loop_bound = 3;
  long long max_paths = 2'000'000;
};

/// Enumerates every execution path of `function` with each loop entry running
/// 0..loop_bound iterations, following the statement structure of the AST.
OracleUses oracle_dataflow(const minilang::TypedProgram& program, minilang::NodeId function,
                           const OracleOptions& options = {});

/// One entry per function definition.
std::vector<OracleUses> oracle_dataflow(const minilang::TypedProgram& program, const OracleOptions& options = {});

/// Candidate index per placeholder.
using Choice = std::vector<int>;

/// Exhaustive argmax of `score` over the product of candidate lists. Ties go to
/// the lexicographically smallest choice. Throws TooLarge above `cap` assignments.
Choice oracle_map(const std::vector<int>& candidate_counts, const std::function<double(const Choice&)>& score,
                  long long cap = 4096);

/// Central-difference gradient of `f` with respect to every entry of `param`.
std::vector<double> finite_diff_grad(const std::function<double()>& f, nn::Tensor& param, double step = 1e-5);

struct GradCheck {
  double max_rel_err = 0;
  std::size_t coordinates = 0;
  std::string worst;  // "tensor[index]" of the largest error
};

/// Compares the gradient left in every tensor of `params` by `forward_backward`
/// with central differences of `forward`. The error of one coordinate is
/// |a - n| / max(|a|, |n|, floor). A coordinate whose error exceeds `retry_above`
/// is re-differenced with the step divided by 10, up to `refinements` times, and
/// keeps its smallest error; this separates kinks inside the step from wrong gradients.
GradCheck check_gradients(nn::ParamStore& params, const std::function<double()>& forward,
                          const std::function<void()>& forward_backward, double step = 1e-5, double floor = 1e-3,
                          double retry_above = 1e-5, int refinements = 2);

}  // namespace smartpaste::oracle
