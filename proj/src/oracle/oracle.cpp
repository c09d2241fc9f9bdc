// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace smartpaste::oracle {

using minilang::Ast;
using minilang::kNoNode;
using minilang::NodeId;
using minilang::NodeKind;
using minilang::TokenSpan;

namespace {

using Unit = std::vector<TokenSpan>;
using Cont = std::function<void()>;

class Enumerator {
 public:
  Enumerator(const minilang::TypedProgram& p, NodeId fn, const OracleOptions& opt) : p_(p), ast_(p.ast), opt_(opt) {
    const auto& f = ast_[fn];
    for (std::size_t i = 1; i + 1 < f.kids.size(); ++i) entry_.push_back(ast_[f.kids[i]].span);
    body_ = f.kids.back();
    for (int t = f.span.lo; t < f.span.hi; ++t)
      if (p.tokens[t].symbol != minilang::kNoSymbol) {
        auto& s = symbols_;
        if (std::find(s.begin(), s.end(), p.tokens[t].symbol) == s.end()) s.push_back(p.tokens[t].symbol);
      }
  }

  OracleUses run() {
    path_.push_back(&entry_);
    exec(body_, [this] { finish(); });
    return std::move(out_);
  }

 private:
  void visit(const Unit* u, const Cont& k) {
    path_.push_back(u);
    k();
    path_.pop_back();
  }
  const Unit* unit_of(NodeId id) {
    auto [it, fresh] = units_.try_emplace(id);
    if (fresh && id != kNoNode) it->second.push_back(ast_[id].span);
    return &it->second;
  }

  void exec_list(const std::vector<NodeId>& xs, std::size_t i, const Cont& k) {
    if (i == xs.size()) {
      k();
      return;
    }
    exec(xs[i], [&, i] { exec_list(xs, i + 1, k); });
  }

  void loop(NodeId cond, NodeId body, NodeId step, int iter, const Cont& k) {
    visit(unit_of(cond), [&] {
      k();
      if (iter < opt_.loop_bound) {
        exec(body, [&] {
          if (step != kNoNode)
            visit(unit_of(step), [&] { loop(cond, body, step, iter + 1, k); });
          else
            loop(cond, body, step, iter + 1, k);
        });
      }
    });
  }

  void exec(NodeId id, const Cont& k) {
    const auto& s = ast_[id];
    switch (s.kind) {
      case NodeKind::Block:
        exec_list(s.kids, 0, k);
        return;
      case NodeKind::Return:
        visit(unit_of(id), [this] { finish(); });
        return;
      case NodeKind::If:
        visit(unit_of(s.kids[0]), [&] {
          exec(s.kids[1], k);
          if (s.kids[2] != kNoNode) exec(s.kids[2], k);
          else k();
        });
        return;
      case NodeKind::While:
        loop(s.kids[0], s.kids[1], kNoNode, 0, k);
        return;
      case NodeKind::For:
        if (s.kids[0] != kNoNode)
          visit(unit_of(s.kids[0]), [&] { loop(s.kids[1], s.kids[3], s.kids[2], 0, k); });
        else
          loop(s.kids[1], s.kids[3], s.kids[2], 0, k);
        return;
      default:
        visit(unit_of(id), k);
        return;
    }
  }

  static void insert(TokenSet& s, int t) {
    auto it = std::lower_bound(s.begin(), s.end(), t);
    if (it == s.end() || *it != t) s.insert(it, t);
  }

  void finish() {
    if (++out_.paths > opt_.max_paths) throw PathExplosion("more than " + std::to_string(opt_.max_paths) + " paths");
    seq_.clear();
    for (const Unit* u : path_)
      for (const auto& sp : *u)
        for (int t = sp.lo; t < sp.hi; ++t) seq_.push_back(t);
    const std::size_t nv = symbols_.size();
    last_.assign(nv, dataflow::kEpsilon);
    for (int t : seq_) {
      const SymbolId here = p_.tokens[t].symbol;
      for (std::size_t i = 0; i < nv; ++i) {
        insert(out_.entries[{t, symbols_[i]}].df_in, last_[i]);
        if (symbols_[i] == here) last_[i] = t;
      }
    }
    last_.assign(nv, dataflow::kEpsilon);
    for (auto it = seq_.rbegin(); it != seq_.rend(); ++it) {
      const int t = *it;
      const SymbolId here = p_.tokens[t].symbol;
      for (std::size_t i = 0; i < nv; ++i) {
        insert(out_.entries[{t, symbols_[i]}].df_out, last_[i]);
        if (symbols_[i] == here) last_[i] = t;
      }
    }
  }

  const minilang::TypedProgram& p_;
  const Ast& ast_;
  OracleOptions opt_;
  Unit entry_;
  NodeId body_ = kNoNode;
  std::vector<SymbolId> symbols_;
  std::map<NodeId, Unit> units_;
  std::vector<const Unit*> path_;
  std::vector<int> seq_;
  std::vector<int> last_;
  OracleUses out_;
};

}  // namespace

OracleUses oracle_dataflow(const minilang::TypedProgram& program, NodeId function, const OracleOptions& options) {
  if (program.ast[function].kind != NodeKind::Function)
    throw std::invalid_argument("oracle_dataflow: not a function definition");
  return Enumerator(program, function, options).run();
}

std::vector<OracleUses> oracle_dataflow(const minilang::TypedProgram& program, const OracleOptions& options) {
  std::vector<OracleUses> out;
  for (NodeId f : program.ast.functions()) out.push_back(oracle_dataflow(program, f, options));
  return out;
}

Choice oracle_map(const std::vector<int>& counts, const std::function<double(const Choice&)>& score, long long cap) {
  long long total = 1;
  for (int c : counts) {
    if (c <= 0) throw std::invalid_argument("oracle_map: empty candidate list");
    total *= c;
    if (total > cap) throw TooLarge("oracle_map: more than " + std::to_string(cap) + " assignments");
  }
  Choice cur(counts.size(), 0), best = cur;
  double best_score = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (long long n = 0; n < total; ++n) {
    const double s = score(cur);
    if (first || s > best_score) {
      best_score = s;
      best = cur;
      first = false;
    }
    // odometer increment with the last position fastest: visits choices in lexicographic order
    for (std::size_t i = cur.size(); i-- > 0;) {
      if (++cur[i] < counts[i]) break;
      cur[i] = 0;
    }
  }
  return best;
}

std::vector<double> finite_diff_grad(const std::function<double()>& f, nn::Tensor& param, double step) {
  std::vector<double> g(param.data.size());
  for (std::size_t i = 0; i < param.data.size(); ++i) {
    const double orig = param.data[i];
    param.data[i] = orig + step;
    const double up = f();
    param.data[i] = orig - step;
    const double down = f();
    param.data[i] = orig;
    g[i] = (up - down) / (2 * step);
  }
  return g;
}

GradCheck check_gradients(nn::ParamStore& params, const std::function<double()>& forward,
                          const std::function<void()>& forward_backward, double step, double floor,
                          double retry_above, int refinements) {
  params.zero_grad();
  forward_backward();
  GradCheck out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    nn::Tensor& t = params.at(i);
    const auto analytic = t.grad;
    const auto numeric = finite_diff_grad(forward, t, step);
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      const double a = analytic[k];
      auto rel = [&](double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor}); };
      double err = rel(numeric[k]);
      // a step that straddles a max/relu switch gives a meaningless difference; shrink it
      double h = step;
      for (int r = 0; r < refinements && err > retry_above; ++r) {
        h /= 10;
        const double x = t.data[k];
        t.data[k] = x + h;
        const double up = forward();
        t.data[k] = x - h;
        const double down = forward();
        t.data[k] = x;
        err = std::min(err, rel((up - down) / (2 * h)));
      }
      ++out.coordinates;
      if (err > out.max_rel_err || out.worst.empty()) {
        if (err >= out.max_rel_err) out.worst = t.name + "[" + std::to_string(k) + "]";
        out.max_rel_err = std::max(out.max_rel_err, err);
      }
    }
  }
  return out;
}

}  // namespace smartpaste::oracle
