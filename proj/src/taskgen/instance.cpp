// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/taskgen/instance.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>

#include "json.hpp"
#include "smartpaste/minilang/lexer.hpp"
#include "smartpaste/minilang/parser.hpp"

namespace smartpaste::taskgen {

using json = nlohmann::json;
using minilang::kNoNode;
using minilang::NodeId;
using minilang::NodeKind;

std::vector<SymbolId> TaskInstance::truth_binding() const {
  std::vector<SymbolId> b;
  b.reserve(program->tokens.size());
  for (const auto& t : program->tokens) b.push_back(t.symbol);
  for (const auto& p : placeholders) b[p.token] = p.truth;
  return b;
}

int TaskInstance::index_of(int token) const {
  for (std::size_t i = 0; i < placeholders.size(); ++i)
    if (placeholders[i].token == token) return static_cast<int>(i);
  return -1;
}

namespace {

bool has_use(const TypedProgram& p, TokenSpan s) {
  for (int t = s.lo; t < s.hi; ++t)
    if (p.tokens[t].symbol != minilang::kNoSymbol && !p.tokens[t].is_def) return true;
  return false;
}

}  // namespace

std::vector<TokenSpan> select_snippets(const TypedProgram& program, int max_tokens) {
  const auto& ast = program.ast;
  std::set<std::pair<int, int>> found;
  auto runs = [&](const std::vector<NodeId>& stmts) {
    for (std::size_t i = 0; i < stmts.size(); ++i)
      for (std::size_t j = i; j < stmts.size(); ++j) {
        const TokenSpan s{ast[stmts[i]].span.lo, ast[stmts[j]].span.hi};
        if (s.size() > max_tokens) break;
        if (has_use(program, s)) found.insert({s.lo, s.hi});
      }
  };
  std::function<void(NodeId)> walk = [&](NodeId id) {
    if (id == kNoNode) return;
    const auto& n = ast[id];
    switch (n.kind) {
      case NodeKind::Block:
        runs(n.kids);
        break;
      case NodeKind::If:
      case NodeKind::While:
      case NodeKind::For:
        // a non-block body is a one-statement list of its own
        for (std::size_t k = 1; k < n.kids.size(); ++k) {
          const NodeId b = n.kids[k];
          if (n.kind == NodeKind::For && k != 3) continue;
          if (b != kNoNode && ast[b].kind != NodeKind::Block) runs({b});
        }
        break;
      default:
        break;
    }
    for (NodeId k : n.kids)
      if (k != kNoNode && minilang::is_statement(ast[k].kind)) walk(k);
  };
  for (NodeId f : ast.functions()) walk(ast[f].kids.back());
  std::vector<TokenSpan> out;
  for (auto [lo, hi] : found) out.push_back({lo, hi});
  return out;
}

TaskInstance make_instance(const TypedProgram& program, TokenSpan span, std::string program_id) {
  if (span.lo < 0 || span.hi > static_cast<int>(program.tokens.size()) || span.lo >= span.hi)
    throw std::out_of_range("make_instance: span outside the program");
  TaskInstance inst;
  inst.program_id = program_id.empty() ? program.file_id : std::move(program_id);
  inst.snippet_span = span;
  auto copy = std::make_shared<TypedProgram>(program);
  for (int t = span.lo; t < span.hi; ++t) {
    const auto& tok = program.tokens[t];
    if (tok.symbol == minilang::kNoSymbol || tok.is_def) continue;
    Placeholder p;
    p.token = t;
    p.truth = tok.symbol;
    p.candidates = minilang::vars_in_scope(program, t);
    const auto ty = program.symbol(p.truth).declared_type;
    for (SymbolId c : p.candidates)
      if (program.symbol(c).declared_type == ty) p.same_type_candidates.push_back(c);
    inst.placeholders.push_back(std::move(p));
    copy->tokens[t].symbol = minilang::kNoSymbol;
    copy->holes[t] = true;
  }
  if (inst.placeholders.empty()) throw NoPlaceholders("snippet has no variable uses to replace");
  inst.program = std::move(copy);
  return inst;
}

std::vector<TaskInstance> extract_instances(const TypedProgram& program, int max_tokens) {
  std::vector<TaskInstance> out;
  for (const auto& s : select_snippets(program, max_tokens)) out.push_back(make_instance(program, s));
  return out;
}

std::string instance_to_json(const TaskInstance& inst) {
  const auto& p = *inst.program;
  json j;
  j["program_id"] = inst.program_id;
  json toks = json::array();
  for (const auto& t : p.tokens) {
    json o{{"text", t.text}, {"kind", std::string(minilang::to_string(t.kind))}, {"is_def", t.is_def}};
    if (t.symbol != minilang::kNoSymbol) o["symbol_id"] = t.symbol;
    toks.push_back(std::move(o));
  }
  j["tokens"] = std::move(toks);
  json types = json::array();
  for (minilang::TypeId t = 0; t < static_cast<minilang::TypeId>(p.lattice.size()); ++t) {
    auto sup = p.lattice.supers(t);
    types.push_back({{"name", p.lattice.name(t)}, {"supers", std::vector<int>(sup.begin(), sup.end())}});
  }
  j["types"] = std::move(types);
  json syms = json::array();
  for (const auto& s : p.symbols) syms.push_back({{"id", s.id}, {"name", s.name}, {"type", s.declared_type}});
  j["symbols"] = std::move(syms);
  j["snippet_span"] = {inst.snippet_span.lo, inst.snippet_span.hi};
  json phs = json::array();
  for (const auto& ph : inst.placeholders)
    phs.push_back({{"token_index", ph.token},
                   {"truth", ph.truth},
                   {"candidates", ph.candidates},
                   {"same_type_candidates", ph.same_type_candidates}});
  j["placeholders"] = std::move(phs);
  return j.dump();
}

TaskInstance instance_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw InstanceFormatError(std::string("malformed instance record: ") + e.what());
  }
  try {
    TaskInstance inst;
    inst.program_id = j.at("program_id").get<std::string>();
    std::string source;
    const auto& toks = j.at("tokens");
    for (const auto& t : toks) {
      if (!source.empty()) source += ' ';
      source += t.at("text").get<std::string>();
    }
    minilang::CheckOptions opt;
    for (const auto& ph : j.at("placeholders")) opt.holes.push_back(ph.at("token_index").get<int>());
    auto prog = std::make_shared<TypedProgram>(minilang::compile(source, inst.program_id, opt));
    if (prog->tokens.size() != toks.size()) throw InstanceFormatError("token count mismatch after re-lexing");
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const auto& t = toks[i];
      const auto& tok = prog->tokens[i];
      const SymbolId want = t.contains("symbol_id") ? t["symbol_id"].get<SymbolId>() : minilang::kNoSymbol;
      if (tok.symbol != want || tok.is_def != t.at("is_def").get<bool>() ||
          minilang::to_string(tok.kind) != t.at("kind").get<std::string>())
        throw InstanceFormatError("token " + std::to_string(i) + " disagrees with its recorded binding");
    }
    const auto& types = j.at("types");
    for (std::size_t i = 0; i < types.size(); ++i) {
      const auto id = static_cast<minilang::TypeId>(i);
      if (!prog->lattice.contains(id) || prog->lattice.name(id) != types[i].at("name").get<std::string>())
        throw InstanceFormatError("type table mismatch at " + std::to_string(i));
    }
    const auto& syms = j.at("symbols");
    if (syms.size() != prog->symbols.size()) throw InstanceFormatError("symbol table size mismatch");
    for (const auto& s : syms) {
      const auto& sym = prog->symbols.at(s.at("id").get<std::size_t>());
      if (sym.name != s.at("name").get<std::string>() || sym.declared_type != s.at("type").get<int>())
        throw InstanceFormatError("symbol table mismatch for " + sym.name);
    }
    const auto span = j.at("snippet_span");
    inst.snippet_span = {span.at(0).get<int>(), span.at(1).get<int>()};
    for (const auto& ph : j.at("placeholders")) {
      Placeholder p;
      p.token = ph.at("token_index").get<int>();
      p.truth = ph.at("truth").get<SymbolId>();
      p.candidates = ph.at("candidates").get<std::vector<SymbolId>>();
      p.same_type_candidates = ph.at("same_type_candidates").get<std::vector<SymbolId>>();
      if (!inst.snippet_span.contains(p.token) ||
          std::find(p.candidates.begin(), p.candidates.end(), p.truth) == p.candidates.end())
        throw InstanceFormatError("placeholder at token " + std::to_string(p.token) + " is inconsistent");
      inst.placeholders.push_back(std::move(p));
    }
    if (inst.placeholders.empty()) throw InstanceFormatError("instance has no placeholders");
    inst.program = std::move(prog);
    return inst;
  } catch (const json::exception& e) {
    throw InstanceFormatError(std::string("malformed instance record: ") + e.what());
  } catch (const minilang::SourceError& e) {
    throw InstanceFormatError(std::string("instance program does not check: ") + e.what());
  }
}

void write_instances(std::ostream& out, const std::vector<TaskInstance>& instances) {
  for (const auto& i : instances) out << instance_to_json(i) << '\n';
}

std::vector<TaskInstance> read_instances(std::istream& in) {
  std::vector<TaskInstance> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(instance_from_json(line));
  return out;
}

std::vector<TaskInstance> read_instances_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  return read_instances(in);
}

void write_instances_file(const std::string& path, const std::vector<TaskInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  write_instances(out, instances);
}

}  // namespace smartpaste::taskgen
