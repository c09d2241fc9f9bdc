// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/minilang/parser.hpp"

#include <sstream>

#include "smartpaste/minilang/lexer.hpp"

namespace smartpaste::minilang {

namespace {

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ", ";
    out += "'" + x + "'";
  }
  return out;
}

bool is_type_keyword(const Token& t) {
  return t.kind == TokenKind::Keyword &&
         (t.text == "int" || t.text == "bool" || t.text == "string" || t.text == "void");
}

class Parser {
 public:
  explicit Parser(std::span<const Token> tokens) : toks_(tokens) {}

  Ast program() {
    NodeId root = make(NodeKind::Program, 0);
    while (!at_end()) {
      NodeId item;
      if (check("type")) item = type_decl();
      else if (check("extern")) item = extern_fn();
      else item = function();
      ast_[root].kids.push_back(item);
    }
    finish(root, 0);
    ast_.root = root;
    return std::move(ast_);
  }

  Ast statements() {
    NodeId root = make(NodeKind::Block, 0);
    while (!at_end()) {
      NodeId s = statement();
      ast_[root].kids.push_back(s);
    }
    finish(root, 0);
    ast_.root = root;
    return std::move(ast_);
  }

 private:
  // -- token helpers
  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& peek(std::size_t ahead = 0) const {
    static const Token eof{};
    return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : eof;
  }
  bool check(std::string_view text, std::size_t ahead = 0) const {
    if (pos_ + ahead >= toks_.size()) return false;
    const Token& t = toks_[pos_ + ahead];
    return t.text == text && t.kind != TokenKind::StringLiteral;
  }
  bool check_kind(TokenKind k, std::size_t ahead = 0) const {
    return pos_ + ahead < toks_.size() && toks_[pos_ + ahead].kind == k;
  }
  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const std::string found = at_end() ? "end of input" : toks_[pos_].text;
    throw ParseError(static_cast<int>(at_end() ? toks_.size() : pos_), std::move(expected), found);
  }
  int expect(std::string_view text) {
    if (!check(text)) fail({std::string(text)});
    return static_cast<int>(pos_++);
  }
  int expect_identifier() {
    if (!check_kind(TokenKind::Identifier)) fail({"identifier"});
    return static_cast<int>(pos_++);
  }
  bool accept(std::string_view text) {
    if (!check(text)) return false;
    ++pos_;
    return true;
  }

  // -- node helpers
  NodeId make(NodeKind k, std::size_t lo) {
    Node n;
    n.kind = k;
    n.span.lo = static_cast<int>(lo);
    ast_.nodes.push_back(std::move(n));
    return static_cast<NodeId>(ast_.nodes.size() - 1);
  }
  void finish(NodeId id, std::size_t lo) {
    ast_[id].span = {static_cast<int>(lo), static_cast<int>(pos_)};
  }
  void add(NodeId parent, NodeId kid) { ast_[parent].kids.push_back(kid); }

  // -- declarations
  NodeId type_ref() {
    const std::size_t lo = pos_;
    NodeId t = make(NodeKind::TypeRef, lo);
    if (is_type_keyword(peek())) {
      ast_[t].text = toks_[pos_++].text;
    } else if (check_kind(TokenKind::Identifier)) {
      ast_[t].text = toks_[pos_++].text;
    } else {
      fail({"type"});
    }
    while (check("[") && check("]", 1)) {
      pos_ += 2;
      ++ast_[t].rank;
    }
    finish(t, lo);
    return t;
  }

  NodeId type_decl() {
    const std::size_t lo = pos_;
    expect("type");
    NodeId d = make(NodeKind::TypeDecl, lo);
    const int name = expect_identifier();
    ast_[d].name_token = name;
    ast_[d].text = toks_[name].text;
    if (accept("implements")) {
      do {
        const std::size_t slo = pos_;
        NodeId s = make(NodeKind::TypeRef, slo);
        const int id = expect_identifier();
        ast_[s].text = toks_[id].text;
        finish(s, slo);
        add(d, s);
      } while (accept(","));
    }
    expect(";");
    finish(d, lo);
    return d;
  }

  NodeId extern_fn() {
    const std::size_t lo = pos_;
    expect("extern");
    expect("fn");
    NodeId d = make(NodeKind::ExternFn, lo);
    const int name = expect_identifier();
    ast_[d].name_token = name;
    ast_[d].text = toks_[name].text;
    expect("(");
    if (!check(")")) {
      do {
        add(d, type_ref());
      } while (accept(","));
    }
    expect(")");
    expect("->");
    add(d, type_ref());
    expect(";");
    finish(d, lo);
    return d;
  }

  NodeId function() {
    const std::size_t lo = pos_;
    if (!is_type_keyword(peek()) && !check_kind(TokenKind::Identifier))
      fail({"type", "extern", "function definition"});
    NodeId f = make(NodeKind::Function, lo);
    add(f, type_ref());
    const int name = expect_identifier();
    ast_[f].name_token = name;
    ast_[f].text = toks_[name].text;
    expect("(");
    if (!check(")")) {
      do {
        const std::size_t plo = pos_;
        NodeId p = make(NodeKind::Param, plo);
        add(p, type_ref());
        const int pn = expect_identifier();
        ast_[p].name_token = pn;
        ast_[p].text = toks_[pn].text;
        finish(p, plo);
        add(f, p);
      } while (accept(","));
    }
    expect(")");
    if (!check("{")) fail({"{"});
    add(f, block());
    finish(f, lo);
    return f;
  }

  // -- statements
  bool starts_declaration() const {
    if (is_type_keyword(peek())) return true;
    if (!check_kind(TokenKind::Identifier)) return false;
    if (check_kind(TokenKind::Identifier, 1)) return true;
    // T[] name / T[][] name
    std::size_t k = 1;
    bool saw = false;
    while (check("[", k) && check("]", k + 1)) {
      k += 2;
      saw = true;
    }
    return saw && check_kind(TokenKind::Identifier, k);
  }

  NodeId block() {
    const std::size_t lo = pos_;
    expect("{");
    NodeId b = make(NodeKind::Block, lo);
    while (!check("}")) {
      if (at_end()) fail({"}"});
      add(b, statement());
    }
    expect("}");
    finish(b, lo);
    return b;
  }

  NodeId var_decl_core(std::size_t lo) {
    NodeId d = make(NodeKind::VarDecl, lo);
    add(d, type_ref());
    const int name = expect_identifier();
    ast_[d].name_token = name;
    ast_[d].text = toks_[name].text;
    if (accept("=")) add(d, expression());
    else add(d, kNoNode);
    return d;
  }

  // assignment, compound assignment, ++/--, or a bare expression (no trailing ';')
  NodeId simple_statement() {
    const std::size_t lo = pos_;
    NodeId e = expression();
    NodeId s;
    if (check("=")) {
      ++pos_;
      s = make(NodeKind::Assign, lo);
      add(s, e);
      add(s, expression());
    } else if (check("+=") || check("-=")) {
      s = make(NodeKind::CompoundAssign, lo);
      ast_[s].text = toks_[pos_++].text;
      add(s, e);
      add(s, expression());
    } else if (check("++") || check("--")) {
      s = make(NodeKind::IncDec, lo);
      ast_[s].text = toks_[pos_++].text;
      add(s, e);
    } else {
      s = make(NodeKind::ExprStmt, lo);
      add(s, e);
    }
    finish(s, lo);
    return s;
  }

  NodeId statement() {
    const std::size_t lo = pos_;
    if (check("{")) return block();
    if (check("if")) {
      ++pos_;
      NodeId s = make(NodeKind::If, lo);
      expect("(");
      add(s, expression());
      expect(")");
      add(s, statement());
      if (accept("else")) add(s, statement());
      else add(s, kNoNode);
      finish(s, lo);
      return s;
    }
    if (check("while")) {
      ++pos_;
      NodeId s = make(NodeKind::While, lo);
      expect("(");
      add(s, expression());
      expect(")");
      add(s, statement());
      finish(s, lo);
      return s;
    }
    if (check("for")) {
      ++pos_;
      NodeId s = make(NodeKind::For, lo);
      expect("(");
      if (check(";")) {
        add(s, kNoNode);
      } else if (starts_declaration()) {
        const std::size_t dlo = pos_;
        NodeId d = var_decl_core(dlo);
        finish(d, dlo);
        add(s, d);
      } else {
        add(s, simple_statement());
      }
      expect(";");
      add(s, check(";") ? kNoNode : expression());
      expect(";");
      add(s, check(")") ? kNoNode : simple_statement());
      expect(")");
      add(s, statement());
      finish(s, lo);
      return s;
    }
    if (check("return")) {
      ++pos_;
      NodeId s = make(NodeKind::Return, lo);
      if (!check(";")) add(s, expression());
      expect(";");
      finish(s, lo);
      return s;
    }
    if (starts_declaration()) {
      NodeId d = var_decl_core(lo);
      expect(";");
      finish(d, lo);
      return d;
    }
    if (at_end() || check(";") || check("}") || check(")"))
      fail({"statement"});
    NodeId s = simple_statement();
    expect(";");
    finish(s, lo);
    return s;
  }

  // -- expressions, lowest to highest precedence
  NodeId binary_level(int level) {
    static const std::vector<std::vector<std::string_view>> kLevels = {
        {"||"}, {"&&"}, {"==", "!="}, {"<", "<=", ">", ">="}, {"+", "-"}, {"*", "/", "%"}};
    if (level == static_cast<int>(kLevels.size())) return unary();
    const std::size_t lo = pos_;
    NodeId lhs = binary_level(level + 1);
    while (true) {
      std::string_view op;
      for (auto o : kLevels[level]) {
        if (check(o) && peek().kind == TokenKind::Operator) {
          op = o;
          break;
        }
      }
      if (op.empty()) return lhs;
      ++pos_;
      NodeId b = make(NodeKind::Binary, lo);
      ast_[b].text = std::string(op);
      add(b, lhs);
      add(b, binary_level(level + 1));
      finish(b, lo);
      lhs = b;
    }
  }

  NodeId expression() { return binary_level(0); }

  NodeId unary() {
    const std::size_t lo = pos_;
    if ((check("!") || check("-")) && peek().kind == TokenKind::Operator) {
      NodeId u = make(NodeKind::Unary, lo);
      ast_[u].text = toks_[pos_++].text;
      add(u, unary());
      finish(u, lo);
      return u;
    }
    return postfix();
  }

  NodeId postfix() {
    const std::size_t lo = pos_;
    NodeId e = primary();
    while (check("[")) {
      ++pos_;
      NodeId ix = make(NodeKind::Index, lo);
      add(ix, e);
      add(ix, expression());
      expect("]");
      finish(ix, lo);
      e = ix;
    }
    return e;
  }

  NodeId primary() {
    const std::size_t lo = pos_;
    if (at_end()) fail({"expression"});
    const Token& t = toks_[pos_];
    switch (t.kind) {
      case TokenKind::IntLiteral:
      case TokenKind::StringLiteral:
      case TokenKind::BoolLiteral: {
        const NodeKind k = t.kind == TokenKind::IntLiteral      ? NodeKind::IntLit
                           : t.kind == TokenKind::StringLiteral ? NodeKind::StringLit
                                                                : NodeKind::BoolLit;
        NodeId n = make(k, lo);
        ast_[n].text = t.text;
        ++pos_;
        finish(n, lo);
        return n;
      }
      case TokenKind::Identifier: {
        if (check("(", 1)) {
          NodeId c = make(NodeKind::Call, lo);
          ast_[c].name_token = static_cast<int>(pos_);
          ast_[c].text = t.text;
          pos_ += 2;
          if (!check(")")) {
            do {
              add(c, expression());
            } while (accept(","));
          }
          expect(")");
          finish(c, lo);
          return c;
        }
        NodeId v = make(NodeKind::VarRef, lo);
        ast_[v].name_token = static_cast<int>(pos_);
        ast_[v].text = t.text;
        ++pos_;
        finish(v, lo);
        return v;
      }
      default:
        break;
    }
    if (check("(")) {
      ++pos_;
      NodeId e = expression();
      expect(")");
      // parentheses are not kept as nodes; widen the span to cover them
      ast_[e].span = {static_cast<int>(lo), static_cast<int>(pos_)};
      return e;
    }
    fail({"expression"});
  }

  std::span<const Token> toks_;
  std::size_t pos_ = 0;
  Ast ast_;
};

// -- pretty printer

class Printer {
 public:
  explicit Printer(const Ast& ast) : ast_(ast) {}

  std::string run() {
    const Node& root = ast_[ast_.root];
    if (root.kind == NodeKind::Program) {
      for (NodeId item : root.kids) item_decl(item);
    } else {
      for (NodeId s : root.kids) stmt(s, 0);
    }
    return out_.str();
  }

 private:
  void indent(int depth) {
    for (int i = 0; i < depth; ++i) out_ << "  ";
  }
  void type(NodeId id) {
    const Node& n = ast_[id];
    out_ << n.text;
    for (int i = 0; i < n.rank; ++i) out_ << " [ ]";
  }
  void item_decl(NodeId id) {
    const Node& n = ast_[id];
    switch (n.kind) {
      case NodeKind::TypeDecl:
        out_ << "type " << n.text;
        for (std::size_t i = 0; i < n.kids.size(); ++i) out_ << (i == 0 ? " implements " : " , ") << ast_[n.kids[i]].text;
        out_ << " ;\n";
        break;
      case NodeKind::ExternFn:
        out_ << "extern fn " << n.text << " (";
        for (std::size_t i = 0; i + 1 < n.kids.size(); ++i) {
          out_ << (i == 0 ? " " : " , ");
          type(n.kids[i]);
        }
        out_ << " ) -> ";
        type(n.kids.back());
        out_ << " ;\n";
        break;
      case NodeKind::Function: {
        type(n.kids[0]);
        out_ << " " << n.text << " (";
        for (std::size_t i = 1; i + 1 < n.kids.size(); ++i) {
          const Node& p = ast_[n.kids[i]];
          out_ << (i == 1 ? " " : " , ");
          type(p.kids[0]);
          out_ << " " << p.text;
        }
        out_ << " ) ";
        stmt(n.kids.back(), 0);
        break;
      }
      default:
        throw std::logic_error("unexpected top-level node");
    }
  }
  void simple(NodeId id) {
    const Node& n = ast_[id];
    switch (n.kind) {
      case NodeKind::VarDecl:
        type(n.kids[0]);
        out_ << " " << n.text;
        if (n.kids[1] != kNoNode) {
          out_ << " = ";
          expr(n.kids[1]);
        }
        break;
      case NodeKind::Assign:
        expr(n.kids[0]);
        out_ << " = ";
        expr(n.kids[1]);
        break;
      case NodeKind::CompoundAssign:
        expr(n.kids[0]);
        out_ << " " << n.text << " ";
        expr(n.kids[1]);
        break;
      case NodeKind::IncDec:
        expr(n.kids[0]);
        out_ << " " << n.text;
        break;
      case NodeKind::ExprStmt:
        expr(n.kids[0]);
        break;
      default:
        throw std::logic_error("not a simple statement");
    }
  }
  void stmt(NodeId id, int depth) {
    const Node& n = ast_[id];
    switch (n.kind) {
      case NodeKind::Block:
        out_ << "{\n";
        for (NodeId s : n.kids) {
          indent(depth + 1);
          stmt(s, depth + 1);
        }
        indent(depth);
        out_ << "}\n";
        break;
      case NodeKind::If:
        out_ << "if ( ";
        expr(n.kids[0]);
        out_ << " ) ";
        stmt(n.kids[1], depth);
        if (n.kids[2] != kNoNode) {
          indent(depth);
          out_ << "else ";
          stmt(n.kids[2], depth);
        }
        break;
      case NodeKind::While:
        out_ << "while ( ";
        expr(n.kids[0]);
        out_ << " ) ";
        stmt(n.kids[1], depth);
        break;
      case NodeKind::For:
        out_ << "for ( ";
        if (n.kids[0] != kNoNode) simple(n.kids[0]);
        out_ << " ; ";
        if (n.kids[1] != kNoNode) expr(n.kids[1]);
        out_ << " ; ";
        if (n.kids[2] != kNoNode) simple(n.kids[2]);
        out_ << " ) ";
        stmt(n.kids[3], depth);
        break;
      case NodeKind::Return:
        out_ << "return";
        if (!n.kids.empty()) {
          out_ << " ";
          expr(n.kids[0]);
        }
        out_ << " ;\n";
        break;
      default:
        simple(id);
        out_ << " ;\n";
        break;
    }
  }
  void expr(NodeId id) {
    const Node& n = ast_[id];
    switch (n.kind) {
      case NodeKind::VarRef:
      case NodeKind::IntLit:
      case NodeKind::StringLit:
      case NodeKind::BoolLit:
        out_ << n.text;
        break;
      case NodeKind::Unary:
        out_ << n.text << " ";
        operand(n.kids[0]);
        break;
      case NodeKind::Binary:
        operand(n.kids[0]);
        out_ << " " << n.text << " ";
        operand(n.kids[1]);
        break;
      case NodeKind::Index:
        operand(n.kids[0]);
        out_ << " [ ";
        expr(n.kids[1]);
        out_ << " ]";
        break;
      case NodeKind::Call:
        out_ << n.text << " (";
        for (std::size_t i = 0; i < n.kids.size(); ++i) {
          out_ << (i == 0 ? " " : " , ");
          expr(n.kids[i]);
        }
        out_ << " )";
        break;
      default:
        throw std::logic_error("not an expression");
    }
  }
  // compound operands are always parenthesised so precedence survives printing
  void operand(NodeId id) {
    const NodeKind k = ast_[id].kind;
    if (k == NodeKind::Binary || k == NodeKind::Unary) {
      out_ << "( ";
      expr(id);
      out_ << " )";
    } else {
      expr(id);
    }
  }

  const Ast& ast_;
  std::ostringstream out_;
};

}  // namespace

ParseError::ParseError(int idx, std::vector<std::string> exp, const std::string& found)
    : SourceError("token " + std::to_string(idx) + ": expected " + join(exp) + ", found '" + found + "'"),
      token_index(idx),
      expected(std::move(exp)) {}

Ast parse(std::span<const Token> tokens) { return Parser(tokens).program(); }

Ast parse_statements(std::span<const Token> tokens) { return Parser(tokens).statements(); }

std::string pretty_print(const Ast& ast) { return Printer(ast).run(); }

}  // namespace smartpaste::minilang
