// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/dataflow/cfg.hpp"

#include <algorithm>

namespace smartpaste::dataflow {

using minilang::Ast;
using minilang::kNoNode;
using minilang::NodeKind;
using Role = CfgNode::Role;

namespace {

class Builder {
 public:
  Builder(const Ast& ast, Cfg& cfg) : ast_(ast), cfg_(cfg) {}

  int add(Role role, NodeId ast, std::vector<TokenSpan> spans) {
    CfgNode n;
    n.role = role;
    n.ast = ast;
    n.spans = std::move(spans);
    cfg_.nodes.push_back(std::move(n));
    return static_cast<int>(cfg_.nodes.size()) - 1;
  }

  void link(const std::vector<int>& from, int to) {
    for (int f : from) {
      auto& s = cfg_.nodes[f].succ;
      if (std::find(s.begin(), s.end(), to) == s.end()) s.push_back(to);
    }
  }

  int simple(Role role, NodeId id, const std::vector<int>& preds) {
    const int n = add(role, id, {ast_[id].span});
    link(preds, n);
    return n;
  }

  // Returns the nodes that fall through to whatever follows `id`.
  std::vector<int> stmt(NodeId id, std::vector<int> preds) {
    const auto& s = ast_[id];
    switch (s.kind) {
      case NodeKind::Block:
        for (NodeId k : s.kids) preds = stmt(k, std::move(preds));
        return preds;
      case NodeKind::Return: {
        const int n = simple(Role::Statement, id, preds);
        link({n}, cfg_.exit);
        return {};
      }
      case NodeKind::If: {
        const int c = simple(Role::Condition, s.kids[0], preds);
        auto out = stmt(s.kids[1], {c});
        if (s.kids[2] != kNoNode) {
          auto e = stmt(s.kids[2], {c});
          out.insert(out.end(), e.begin(), e.end());
        } else {
          out.push_back(c);
        }
        return out;
      }
      case NodeKind::While: {
        const int c = simple(Role::Condition, s.kids[0], preds);
        link(stmt(s.kids[1], {c}), c);
        return {c};
      }
      case NodeKind::For: {
        if (s.kids[0] != kNoNode) preds = {simple(Role::ForInit, s.kids[0], preds)};
        // a missing condition still gets a (token-free) node so the loop can exit
        const int c = s.kids[1] != kNoNode ? simple(Role::Condition, s.kids[1], preds)
                                           : add(Role::Condition, kNoNode, {});
        if (s.kids[1] == kNoNode) link(preds, c);
        auto body = stmt(s.kids[3], {c});
        if (s.kids[2] != kNoNode) body = {simple(Role::ForStep, s.kids[2], body)};
        link(body, c);
        return {c};
      }
      default:
        return {simple(Role::Statement, id, preds)};
    }
  }

 private:
  const Ast& ast_;
  Cfg& cfg_;
};

void prune_and_index(Cfg& cfg) {
  const int n = static_cast<int>(cfg.nodes.size());
  std::vector<bool> seen(n, false);
  std::vector<int> work{cfg.entry};
  seen[cfg.entry] = true;
  while (!work.empty()) {
    const int v = work.back();
    work.pop_back();
    for (int s : cfg.nodes[v].succ)
      if (!seen[s]) {
        seen[s] = true;
        work.push_back(s);
      }
  }
  seen[cfg.exit] = true;
  std::vector<int> remap(n, -1);
  std::vector<CfgNode> kept;
  for (int i = 0; i < n; ++i)
    if (seen[i]) {
      remap[i] = static_cast<int>(kept.size());
      kept.push_back(std::move(cfg.nodes[i]));
    }
  for (auto& node : kept) {
    std::vector<int> succ;
    for (int s : node.succ)
      if (remap[s] >= 0) succ.push_back(remap[s]);
    node.succ = std::move(succ);
    node.pred.clear();
  }
  for (int i = 0; i < static_cast<int>(kept.size()); ++i)
    for (int s : kept[i].succ) kept[s].pred.push_back(i);
  cfg.entry = remap[cfg.entry];
  cfg.exit = remap[cfg.exit];
  cfg.nodes = std::move(kept);

  cfg.node_of_token.assign(cfg.function_span.size(), -1);
  for (int i = 0; i < static_cast<int>(cfg.nodes.size()); ++i)
    for (const auto& sp : cfg.nodes[i].spans)
      for (int t = sp.lo; t < sp.hi; ++t) cfg.node_of_token[t - cfg.function_span.lo] = i;
}

}  // namespace

bool Cfg::has_edge(int from, int to) const {
  const auto& s = nodes.at(from).succ;
  return std::find(s.begin(), s.end(), to) != s.end();
}

int Cfg::node_for_ast(NodeId ast) const {
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
    if (nodes[i].ast == ast) return i;
  return -1;
}

Cfg build_cfg(const minilang::TypedProgram& program, NodeId function) {
  const Ast& ast = program.ast;
  const auto& fn = ast[function];
  if (fn.kind != NodeKind::Function) throw std::invalid_argument("build_cfg: not a function definition");
  Cfg cfg;
  cfg.function = function;
  cfg.function_span = fn.span;
  Builder b(ast, cfg);
  std::vector<TokenSpan> params;
  for (std::size_t i = 1; i + 1 < fn.kids.size(); ++i) params.push_back(ast[fn.kids[i]].span);
  cfg.entry = b.add(Role::Entry, function, std::move(params));
  cfg.exit = b.add(Role::Exit, kNoNode, {});
  b.link(b.stmt(fn.kids.back(), {cfg.entry}), cfg.exit);
  prune_and_index(cfg);
  return cfg;
}

std::vector<Cfg> build_cfgs(const minilang::TypedProgram& program) {
  std::vector<Cfg> out;
  for (NodeId f : program.ast.functions()) out.push_back(build_cfg(program, f));
  return out;
}

int cfg_containing(const std::vector<Cfg>& cfgs, int t) {
  for (int i = 0; i < static_cast<int>(cfgs.size()); ++i)
    if (cfgs[i].function_span.contains(t)) return i;
  return -1;
}

}  // namespace smartpaste::dataflow
