// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/minilang/checker.hpp"

#include <algorithm>
#include <functional>

#include "smartpaste/minilang/parser.hpp"

namespace smartpaste::minilang {

namespace {

constexpr TypeId kUnk = TypeLattice::kUnk;

class Checker {
 public:
  Checker(TypedProgram& p, const CheckOptions& opt) : p_(p) {
    p_.holes.assign(p_.tokens.size(), false);
    for (int h : opt.holes) {
      if (h < 0 || h >= static_cast<int>(p_.tokens.size()) || p_.tokens[h].kind != TokenKind::Identifier)
        throw std::invalid_argument("hole is not an identifier token");
      p_.holes[h] = true;
    }
    p_.node_types.assign(p_.ast.size(), kUnk);
    p_.function_of_token.assign(p_.tokens.size(), kNoNode);
  }

  void run() {
    const Node& root = p_.ast[p_.ast.root];
    for (NodeId item : root.kids) {
      const Node& n = p_.ast[item];
      if (n.kind != NodeKind::ExternFn && n.kind != NodeKind::Function) continue;
      FunctionSig sig;
      sig.name = n.text;
      sig.external = n.kind == NodeKind::ExternFn;
      if (sig.external) {
        for (std::size_t i = 0; i + 1 < n.kids.size(); ++i) sig.params.push_back(value_type(n.kids[i]));
        sig.result = resolve(n.kids.back());
      } else {
        sig.result = resolve(n.kids[0]);
        for (std::size_t i = 1; i + 1 < n.kids.size(); ++i)
          sig.params.push_back(value_type(p_.ast[n.kids[i]].kids[0]));
      }
      if (p_.functions.count(sig.name) != 0)
        throw RedeclError(n.name_token, "function '" + sig.name + "' is already defined");
      p_.functions.emplace(sig.name, std::move(sig));
    }
    for (NodeId item : root.kids)
      if (p_.ast[item].kind == NodeKind::Function) function(item);
  }

 private:
  // -- types
  TypeId resolve(NodeId ref) {
    const Node& n = p_.ast[ref];
    auto base = p_.lattice.find(n.text);
    if (!base || *base == kUnk || (*base != TypeLattice::kInt && *base != TypeLattice::kBool &&
                                   *base != TypeLattice::kString && *base != TypeLattice::kVoid &&
                                   !p_.lattice.is_nominal(*base)))
      throw NameError(n.span.lo, "unknown type '" + n.text + "'");
    TypeId t = *base;
    if (t == TypeLattice::kVoid && n.rank > 0) throw TypeError(n.span.lo, "array of void");
    for (int i = 0; i < n.rank; ++i) t = p_.lattice.array_of(t);
    return t;
  }
  TypeId value_type(NodeId ref) {
    const TypeId t = resolve(ref);
    if (t == TypeLattice::kVoid) throw TypeError(p_.ast[ref].span.lo, "void is not a value type");
    return t;
  }
  std::string tname(TypeId t) const { return p_.lattice.name(t); }
  bool fits(TypeId from, TypeId to) const {
    return from == kUnk || to == kUnk || p_.lattice.assignable(from, to);
  }
  void require_type(NodeId e, TypeId got, TypeId want) {
    if (!fits(got, want))
      throw TypeError(p_.ast[e].span.lo, "expected " + tname(want) + ", found " + tname(got));
  }

  // -- scopes
  SymbolId lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->names.find(name);
      if (f != it->names.end()) return f->second;
    }
    return kNoSymbol;
  }
  void declare(int name_token, const std::string& name, TypeId type, int scope_end, bool param) {
    if (lookup(name) != kNoSymbol)
      throw RedeclError(name_token, "'" + name + "' is already declared in an enclosing scope");
    Symbol s;
    s.id = static_cast<SymbolId>(p_.symbols.size());
    s.name = name;
    s.declared_type = type;
    s.decl_token = name_token;
    s.scope_span = {name_token, scope_end};
    s.function = current_fn_;
    s.is_param = param;
    scopes_.back().names.emplace(name, s.id);
    p_.tokens[name_token].symbol = s.id;
    p_.tokens[name_token].is_def = true;
    p_.symbols.push_back(std::move(s));
  }
  void push_scope(int end) { scopes_.push_back({{}, end}); }
  void pop_scope() { scopes_.pop_back(); }

  // -- functions and statements
  void function(NodeId id) {
    const Node& f = p_.ast[id];
    current_fn_ = id;
    for (int t = f.span.lo; t < f.span.hi; ++t) p_.function_of_token[t] = id;
    result_ = resolve(f.kids[0]);
    push_scope(f.span.hi);
    for (std::size_t i = 1; i + 1 < f.kids.size(); ++i) {
      const Node& prm = p_.ast[f.kids[i]];
      declare(prm.name_token, prm.text, value_type(prm.kids[0]), f.span.hi, true);
    }
    statement(f.kids.back());
    pop_scope();
    current_fn_ = kNoNode;
  }

  // a non-block statement used as a body gets its own scope
  void body(NodeId id) {
    if (p_.ast[id].kind == NodeKind::Block) {
      statement(id);
      return;
    }
    push_scope(p_.ast[id].span.hi);
    statement(id);
    pop_scope();
  }

  void statement(NodeId id) {
    const Node& n = p_.ast[id];
    switch (n.kind) {
      case NodeKind::Block:
        push_scope(n.span.hi);
        for (NodeId s : n.kids) statement(s);
        pop_scope();
        break;
      case NodeKind::VarDecl: {
        const TypeId t = value_type(n.kids[0]);
        if (n.kids[1] != kNoNode) require_type(n.kids[1], expr(n.kids[1]), t);
        declare(n.name_token, n.text, t, scopes_.back().end, false);
        break;
      }
      case NodeKind::Assign: {
        const TypeId t = lvalue(n.kids[0]);
        require_type(n.kids[1], expr(n.kids[1]), t);
        break;
      }
      case NodeKind::CompoundAssign: {
        const TypeId t = lvalue(n.kids[0]);
        const TypeId v = expr(n.kids[1]);
        if (n.text == "+=" && t == TypeLattice::kString) {
          require_type(n.kids[1], v, TypeLattice::kString);
        } else {
          require_type(n.kids[0], t, TypeLattice::kInt);
          require_type(n.kids[1], v, TypeLattice::kInt);
        }
        break;
      }
      case NodeKind::IncDec:
        require_type(n.kids[0], lvalue(n.kids[0]), TypeLattice::kInt);
        break;
      case NodeKind::If:
        require_type(n.kids[0], expr(n.kids[0]), TypeLattice::kBool);
        body(n.kids[1]);
        if (n.kids[2] != kNoNode) body(n.kids[2]);
        break;
      case NodeKind::While:
        require_type(n.kids[0], expr(n.kids[0]), TypeLattice::kBool);
        body(n.kids[1]);
        break;
      case NodeKind::For:
        push_scope(n.span.hi);
        if (n.kids[0] != kNoNode) statement(n.kids[0]);
        if (n.kids[1] != kNoNode) require_type(n.kids[1], expr(n.kids[1]), TypeLattice::kBool);
        if (n.kids[2] != kNoNode) statement(n.kids[2]);
        body(n.kids[3]);
        pop_scope();
        break;
      case NodeKind::Return:
        if (n.kids.empty()) {
          if (result_ != TypeLattice::kVoid) throw TypeError(n.span.lo, "missing return value");
        } else {
          if (result_ == TypeLattice::kVoid) throw TypeError(n.span.lo, "void function returns a value");
          require_type(n.kids[0], expr(n.kids[0]), result_);
        }
        break;
      case NodeKind::ExprStmt:
        expr(n.kids[0]);
        break;
      default:
        throw std::logic_error("unexpected statement node");
    }
  }

  TypeId lvalue(NodeId id) {
    const NodeKind k = p_.ast[id].kind;
    if (k != NodeKind::VarRef && k != NodeKind::Index)
      throw TypeError(p_.ast[id].span.lo, "left side is not assignable");
    return expr(id);
  }

  TypeId expr(NodeId id) {
    const TypeId t = expr_inner(id);
    p_.node_types[id] = t;
    return t;
  }

  TypeId expr_inner(NodeId id) {
    const Node& n = p_.ast[id];
    switch (n.kind) {
      case NodeKind::IntLit: return TypeLattice::kInt;
      case NodeKind::StringLit: return TypeLattice::kString;
      case NodeKind::BoolLit: return TypeLattice::kBool;
      case NodeKind::VarRef: {
        if (p_.holes[n.name_token]) return kUnk;
        const SymbolId s = lookup(n.text);
        if (s == kNoSymbol) throw NameError(n.name_token, "undeclared identifier '" + n.text + "'");
        p_.tokens[n.name_token].symbol = s;
        return p_.symbols[s].declared_type;
      }
      case NodeKind::Unary: {
        const TypeId t = expr(n.kids[0]);
        const TypeId want = n.text == "!" ? TypeLattice::kBool : TypeLattice::kInt;
        require_type(n.kids[0], t, want);
        return want;
      }
      case NodeKind::Binary: {
        const TypeId a = expr(n.kids[0]);
        const TypeId b = expr(n.kids[1]);
        const std::string& op = n.text;
        if (op == "&&" || op == "||") {
          require_type(n.kids[0], a, TypeLattice::kBool);
          require_type(n.kids[1], b, TypeLattice::kBool);
          return TypeLattice::kBool;
        }
        if (op == "==" || op == "!=") {
          if (!fits(a, b) && !fits(b, a))
            throw TypeError(n.span.lo, "cannot compare " + tname(a) + " with " + tname(b));
          return TypeLattice::kBool;
        }
        if (op == "<" || op == "<=" || op == ">" || op == ">=") {
          require_type(n.kids[0], a, TypeLattice::kInt);
          require_type(n.kids[1], b, TypeLattice::kInt);
          return TypeLattice::kBool;
        }
        if (op == "+" && (a == TypeLattice::kString || b == TypeLattice::kString)) {
          require_type(n.kids[0], a, TypeLattice::kString);
          require_type(n.kids[1], b, TypeLattice::kString);
          return TypeLattice::kString;
        }
        require_type(n.kids[0], a, TypeLattice::kInt);
        require_type(n.kids[1], b, TypeLattice::kInt);
        return (a == kUnk && b == kUnk && op == "+") ? kUnk : TypeLattice::kInt;
      }
      case NodeKind::Index: {
        const TypeId a = expr(n.kids[0]);
        require_type(n.kids[1], expr(n.kids[1]), TypeLattice::kInt);
        if (a == kUnk) return kUnk;
        auto elem = p_.lattice.element(a);
        if (!elem) throw TypeError(n.span.lo, "indexing a non-array of type " + tname(a));
        return *elem;
      }
      case NodeKind::Call: {
        auto it = p_.functions.find(n.text);
        if (it == p_.functions.end()) throw NameError(n.name_token, "unknown function '" + n.text + "'");
        const FunctionSig& sig = it->second;
        if (sig.params.size() != n.kids.size())
          throw TypeError(n.name_token, "'" + n.text + "' expects " + std::to_string(sig.params.size()) +
                                            " arguments, got " + std::to_string(n.kids.size()));
        for (std::size_t i = 0; i < n.kids.size(); ++i) require_type(n.kids[i], expr(n.kids[i]), sig.params[i]);
        return sig.result;
      }
      default:
        throw std::logic_error("unexpected expression node");
    }
  }

  struct Scope {
    std::map<std::string, SymbolId> names;
    int end;
  };

  TypedProgram& p_;
  std::vector<Scope> scopes_;
  NodeId current_fn_ = kNoNode;
  TypeId result_ = TypeLattice::kVoid;
};

}  // namespace

CheckError::CheckError(int t, const std::string& msg)
    : SourceError("token " + std::to_string(t) + ": " + msg), token(t) {}

std::string TypedProgram::source() const {
  std::string out;
  for (const auto& t : tokens) out += t.leading + t.text;
  return out + trailing;
}

TypeLattice collect_types(const Ast& ast) {
  TypeLattice lattice;
  const Node& root = ast[ast.root];
  for (NodeId item : root.kids) {
    const Node& n = ast[item];
    if (n.kind != NodeKind::TypeDecl) continue;
    if (lattice.find(n.text)) throw RedeclError(n.name_token, "type '" + n.text + "' is already defined");
    lattice.add_nominal(n.text);
  }
  for (NodeId item : root.kids) {
    const Node& n = ast[item];
    if (n.kind != NodeKind::TypeDecl) continue;
    const TypeId t = *lattice.find(n.text);
    for (NodeId s : n.kids) {
      auto st = lattice.find(ast[s].text);
      if (!st || !lattice.is_nominal(*st))
        throw NameError(ast[s].span.lo, "unknown supertype '" + ast[s].text + "'");
      lattice.add_super(t, *st);
    }
  }
  lattice.validate();
  return lattice;
}

TypedProgram check(Ast ast, TokenStream tokens, const TypeLattice& lattice, std::string file_id,
                   const CheckOptions& options) {
  TypedProgram p;
  p.file_id = std::move(file_id);
  p.tokens = std::move(tokens.tokens);
  p.trailing = std::move(tokens.trailing);
  for (auto& t : p.tokens) {
    t.symbol = kNoSymbol;
    t.is_def = false;
  }
  p.ast = std::move(ast);
  p.lattice = lattice;
  Checker(p, options).run();
  return p;
}

TypedProgram compile(std::string_view source, std::string file_id, const CheckOptions& options) {
  TokenStream ts = tokenize(source);
  Ast ast = parse(ts.tokens);
  TypeLattice lattice = collect_types(ast);
  return check(std::move(ast), std::move(ts), lattice, std::move(file_id), options);
}

std::vector<SymbolId> vars_in_scope(const TypedProgram& program, int t) {
  std::vector<SymbolId> out;
  for (const auto& s : program.symbols)
    if (s.scope_span.contains(t) && s.decl_token < t) out.push_back(s.id);
  return out;
}

int statement_count(const Ast& ast, NodeId function) {
  int count = 0;
  std::function<void(NodeId)> walk = [&](NodeId id) {
    if (id == kNoNode) return;
    const Node& n = ast[id];
    if (!is_statement(n.kind)) return;
    if (n.kind != NodeKind::Block) ++count;
    for (NodeId k : n.kids) walk(k);
  };
  walk(ast[function].kids.back());
  return count;
}

}  // namespace smartpaste::minilang
