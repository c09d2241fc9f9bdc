// SPDX-License-Identifier: Apache-2.0
#include "smartpaste/taskgen/generator.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "smartpaste/minilang/checker.hpp"

namespace smartpaste::taskgen {

namespace fs = std::filesystem;

Profile profile_from_string(std::string_view s) {
  if (s == "mixed") return Profile::Mixed;
  if (s == "typesep") return Profile::TypeSep;
  if (s == "loops") return Profile::Loops;
  if (s == "stress") return Profile::Stress;
  if (s == "straight") return Profile::Straight;
  throw std::invalid_argument("unknown profile: " + std::string(s));
}

std::string_view to_string(Profile p) {
  switch (p) {
    case Profile::Mixed: return "mixed";
    case Profile::TypeSep: return "typesep";
    case Profile::Loops: return "loops";
    case Profile::Stress: return "stress";
    case Profile::Straight: return "straight";
  }
  return "?";
}

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin(double p = 0.5) { return std::uniform_real_distribution<double>(0, 1)(eng_) < p; }
  template <class T>
  const T& pick(const std::vector<T>& xs) {
    return xs.at(static_cast<std::size_t>(between(0, static_cast<int>(xs.size()) - 1)));
  }
  template <class T>
  void shuffle(std::vector<T>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i) std::swap(xs[i - 1], xs[static_cast<std::size_t>(between(0, static_cast<int>(i) - 1))]);
  }
  std::uint64_t next() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

class Writer {
 public:
  void line(const std::string& s) { out_ += std::string(2 * depth_, ' ') + s + "\n"; }
  void open(const std::string& header) {
    line(header + " {");
    ++depth_;
  }
  void close(const std::string& tail = "") {
    --depth_;
    line("}" + tail);
  }
  void indent() { ++depth_; }
  void dedent() { --depth_; }
  void blank() { out_ += "\n"; }
  void raw(const std::string& s) { out_ += s; }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
  int depth_ = 0;
};

const std::vector<std::string> kFunctionVerbs = {"Sum", "Count", "Scan", "Collect", "Reduce", "Tally", "Fold",
                                                 "Measure", "Check", "Update", "Process", "Merge", "Apply", "Track"};
const std::vector<std::string> kFunctionNouns = {"Positive", "Values", "Items", "Entries", "Scores", "Hits",
                                                 "Samples", "Weights", "Records", "Steps", "Slots", "Marks"};
const std::vector<std::string> kTypeNouns = {"Widget", "Node", "Buffer", "Channel", "Record", "Session", "Token",
                                             "Window", "Packet", "Cursor", "Frame", "Layer", "Handle", "Stream",
                                             "Entry", "Shape", "Block", "Query", "Reader", "Writer"};
const std::vector<std::string> kSyllables = {"ka", "lo", "mi", "zu", "re", "to", "na", "vi", "so", "pe",
                                             "gra", "dor", "fen", "hal", "jin", "qua", "wex", "yor", "bel", "cyn"};

const std::vector<std::string> kCounterNames = {"i", "j", "k", "idx", "pos", "n"};
const std::vector<std::string> kBoundNames = {"lim", "len", "size", "count", "limit", "end", "max", "total"};
const std::vector<std::string> kAccNames = {"sum", "total", "acc", "result", "res", "score", "agg", "hits"};
const std::vector<std::string> kArrNames = {"arr", "values", "xs", "items", "data", "nums", "buf", "vals"};
const std::vector<std::string> kIntNames = {"n", "m", "k", "count", "width", "height", "depth", "level",
                                            "offset", "step", "rank", "weight", "size", "delta", "amount"};
const std::vector<std::string> kStrNames = {"name", "path", "dir", "label", "text", "title", "key", "prefix",
                                            "suffix", "line", "msg", "root", "file", "ext"};
const std::vector<std::string> kBoolNames = {"ok", "found", "done", "ready", "valid", "dirty", "seen", "flag",
                                             "active", "changed", "enabled", "missing"};
const std::vector<std::string> kObjNames = {"obj", "cur", "item", "node", "target", "source", "head", "elem",
                                            "owner", "peer", "first", "last", "other", "parent", "child"};

const char* kCommonExterns =
    "extern fn len(int[]) -> int;\n"
    "extern fn newInts(int) -> int[];\n"
    "extern fn sortInts(int[]) -> void;\n"
    "extern fn log(string) -> void;\n"
    "extern fn trim(string) -> string;\n"
    "extern fn joinPath(string, string) -> string;\n"
    "extern fn baseName(string) -> string;\n"
    "extern fn exists(string) -> bool;\n"
    "extern fn parseInt(string) -> int;\n"
    "extern fn toStr(int) -> string;\n";

// Tracks names used in one function so nothing shadows.
class Names {
 public:
  explicit Names(Rng& rng) : rng_(rng) {}
  std::string fresh(const std::vector<std::string>& pool) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const std::string& n = rng_.pick(pool);
      if (used_.insert(n).second) return n;
    }
    for (int k = 2;; ++k) {
      const std::string n = rng_.pick(pool) + std::to_string(k);
      if (used_.insert(n).second) return n;
    }
  }
  void reserve(const std::string& n) { used_.insert(n); }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

// ---------------------------------------------------------------- loops

struct LoopRoles {
  std::string arr, lim, acc, i, target, off, mask, flag;
};

void emit_loop_function(Rng& rng, Writer& w, const std::string& fname) {
  Names names(rng);
  LoopRoles r;
  r.arr = names.fresh(kArrNames);
  r.lim = names.fresh(kBoundNames);
  r.acc = names.fresh(kAccNames);
  r.i = names.fresh(kCounterNames);
  const int shape = rng.between(0, 4);  // 0 sum-if, 1 count-if, 2 max, 3 sum-all, 4 sum-if (while)
  const bool lim_param = rng.coin(0.6);
  const bool use_target = shape == 1 && rng.coin(0.5);
  if (use_target) r.target = names.fresh(kIntNames);
  // optional distractors: an int offset, a second array for the test, a bool flag
  const bool use_off = shape != 2 && rng.coin(0.4);
  if (use_off) r.off = names.fresh(kIntNames);
  const bool use_mask = shape != 2 && shape != 3 && rng.coin(0.3);
  if (use_mask) r.mask = names.fresh(kArrNames);
  const bool use_flag = shape != 3 && rng.coin(0.4);
  if (use_flag) r.flag = names.fresh(kBoolNames);

  std::vector<std::string> params{"int[] " + r.arr};
  if (lim_param) params.push_back("int " + r.lim);
  if (use_target) params.push_back("int " + r.target);
  if (use_off) params.push_back("int " + r.off);
  if (use_mask) params.push_back("int[] " + r.mask);
  rng.shuffle(params);
  std::string sig = "int " + fname + "(";
  for (std::size_t k = 0; k < params.size(); ++k) sig += (k ? ", " : "") + params[k];
  w.open(sig + ")");

  std::vector<std::string> decls;
  const std::string init = shape == 2 ? r.arr + "[0]" : "0";
  decls.push_back("int " + r.acc + " = " + init + ";");
  if (!lim_param) decls.push_back("int " + r.lim + " = len(" + r.arr + ");");
  if (use_flag) decls.push_back("bool " + r.flag + " = false;");
  rng.shuffle(decls);
  for (const auto& d : decls) w.line(d);

  const std::string elem = r.arr + "[" + r.i + "]";
  const std::string test = use_mask ? r.mask + "[" + r.i + "]" : elem;
  const std::string val = use_off ? elem + " + " + r.off : elem;
  std::string cond;
  std::string update;
  switch (shape) {
    case 0:
    case 4: {
      const int c = rng.between(0, 3);
      cond = c == 0 ? test + " > 0" : c == 1 ? test + " < " + std::to_string(rng.between(1, 9))
                                 : c == 2 ? test + " != " + std::to_string(rng.between(0, 9))
                                          : test + " >= 0";
      const int u = rng.between(0, 2);
      update = u == 0 ? r.acc + " += " + val + ";" : u == 1 ? r.acc + " = " + r.acc + " + " + val + ";"
                                                      : r.acc + " -= " + val + ";";
      break;
    }
    case 1:
      cond = test + (rng.coin() ? " == " : " > ") + (use_target ? r.target : std::to_string(rng.between(0, 9)));
      update = use_off ? r.acc + " += " + r.off + ";" : rng.coin() ? r.acc + "++;" : r.acc + " += 1;";
      break;
    case 2:
      cond = elem + " > " + r.acc;
      update = r.acc + " = " + elem + ";";
      break;
    default:
      update = rng.coin() ? r.acc + " += " + val + ";" : r.acc + " = " + r.acc + " + " + val + ";";
      break;
  }
  const bool braces = use_flag || rng.coin(0.4);
  auto body = [&] {
    if (cond.empty()) {
      w.line(update);
    } else if (braces) {
      w.open("if (" + cond + ")");
      w.line(update);
      if (use_flag) w.line(r.flag + " = true;");
      w.close();
    } else {
      w.line("if (" + cond + ")");
      w.indent();
      w.line(update);
      w.dedent();
    }
  };
  if (shape == 4) {
    w.line("int " + r.i + " = 0;");
    w.open("while (" + r.i + " < " + r.lim + ")");
    body();
    w.line(r.i + "++;");
    w.close();
  } else {
    const std::string header = "for (int " + r.i + " = 0; " + r.i + " < " + r.lim + "; " + r.i + "++)";
    if (rng.coin(0.5)) {
      w.open(header);
      body();
      w.close();
    } else {
      w.line(header);
      w.indent();
      body();
      w.dedent();
    }
  }
  if (use_flag) {
    w.line("if (" + r.flag + ")");
    w.indent();
    w.line(r.acc + " = " + r.acc + " + 1;");
    w.dedent();
  }
  w.line("return " + r.acc + ";");
  w.close();
}

// ---------------------------------------------------------------- typed templates

struct ProjectTypes {
  std::vector<std::string> nominal;                   // declared types
  std::map<std::string, std::vector<std::string>> supers;
  std::string decls;                                   // type + extern declarations
};

ProjectTypes make_project_types(Rng& rng, int project, bool lattice) {
  ProjectTypes pt;
  std::vector<std::string> nouns = kTypeNouns;
  rng.shuffle(nouns);
  // project prefix keeps type names disjoint between projects
  std::string prefix = capitalize(kSyllables[static_cast<std::size_t>(project) % kSyllables.size()]) +
                       kSyllables[(static_cast<std::size_t>(project) / kSyllables.size() + 3) % kSyllables.size()];
  const int n = rng.between(2, 4);
  std::string decls;
  if (lattice) {
    const std::string base = prefix + "Base";
    pt.nominal.push_back(base);
    decls += "type " + base + ";\n";
    for (int k = 0; k < n; ++k) {
      const std::string t = prefix + nouns[static_cast<std::size_t>(k)];
      std::vector<std::string> sup;
      if (rng.coin(0.7)) sup.push_back(base);
      if (k > 0 && rng.coin(0.3)) sup.push_back(pt.nominal[static_cast<std::size_t>(rng.between(1, k))]);
      std::string line = "type " + t;
      for (std::size_t s = 0; s < sup.size(); ++s) line += (s ? ", " : " implements ") + sup[s];
      decls += line + ";\n";
      pt.nominal.push_back(t);
      pt.supers[t] = sup;
    }
  } else {
    for (int k = 0; k < n; ++k) {
      const std::string t = prefix + nouns[static_cast<std::size_t>(k)];
      decls += "type " + t + ";\n";
      pt.nominal.push_back(t);
    }
  }
  decls += kCommonExterns;
  for (const auto& t : pt.nominal) {
    decls += "extern fn make" + t + "() -> " + t + ";\n";
    decls += "extern fn touch" + t + "(" + t + ") -> void;\n";
    decls += "extern fn is" + t + "Ready(" + t + ") -> bool;\n";
    decls += "extern fn nameOf" + t + "(" + t + ") -> string;\n";
    decls += "extern fn sizeOf" + t + "(" + t + ") -> int;\n";
  }
  pt.decls = decls;
  return pt;
}

struct Var {
  std::string name;
  std::string type;
};

class Env {
 public:
  void push() { marks_.push_back(vars_.size()); }
  void pop() {
    vars_.resize(marks_.back());
    marks_.pop_back();
  }
  void add(Var v) { vars_.push_back(std::move(v)); }
  std::vector<const Var*> of_type(const std::string& t) const {
    std::vector<const Var*> out;
    for (const auto& v : vars_)
      if (v.type == t) out.push_back(&v);
    return out;
  }
  const std::vector<Var>& all() const { return vars_; }

 private:
  std::vector<Var> vars_;
  std::vector<std::size_t> marks_;
};

const std::vector<std::string>& pool_for(const std::string& type) {
  if (type == "int") return kIntNames;
  if (type == "string") return kStrNames;
  if (type == "bool") return kBoolNames;
  if (type == "int[]") return kArrNames;
  return kObjNames;
}

std::string literal_for(Rng& rng, const std::string& type) {
  if (type == "int") return std::to_string(rng.between(0, 9));
  if (type == "bool") return rng.coin() ? "true" : "false";
  if (type == "string") {
    static const std::vector<std::string> lits = {"\"tmp\"", "\"/\"", "\".txt\"", "\"data\"", "\"\"", "\"log\""};
    return rng.pick(lits);
  }
  if (type == "int[]") return "newInts(" + std::to_string(rng.between(1, 9)) + ")";
  return "make" + type + "()";
}

// Emits statements that use the environment's variables through type-specific
// idioms. In `distinct` mode each function holds at most one variable per type.
class TypedBody {
 public:
  TypedBody(Rng& rng, Writer& w, Names& names, const ProjectTypes& pt, bool distinct)
      : rng_(rng), w_(w), names_(names), pt_(pt), distinct_(distinct) {}

  Env env;

  void declare(const std::string& type, bool with_init = true) {
    const std::string n = names_.fresh(pool_for(type));
    w_.line(type + " " + n + (with_init ? " = " + literal_for(rng_, type) : "") + ";");
    env.add({n, type});
  }

  void statement(int depth) {
    const auto& vars = env.all();
    if (vars.empty()) return;
    const Var v = rng_.pick(vars);
    if (v.type == "int") int_stmt(v, depth);
    else if (v.type == "bool") bool_stmt(v, depth);
    else if (v.type == "string") string_stmt(v, depth);
    else if (v.type == "int[]") array_stmt(v, depth);
    else object_stmt(v, depth);
  }

 private:
  std::string other(const std::string& type, const std::string& not_name) {
    std::vector<std::string> c;
    for (const Var* x : env.of_type(type))
      if (x->name != not_name) c.push_back(x->name);
    return c.empty() ? std::string() : rng_.pick(c);
  }

  void nested(const std::string& header, int depth) {
    w_.open(header);
    env.push();
    const int n = rng_.between(1, 2);
    for (int k = 0; k < n; ++k) statement(depth + 1);
    env.pop();
    w_.close();
  }

  void int_stmt(const Var& v, int depth) {
    const std::string o = other("int", v.name);
    const int k = rng_.between(0, depth < 2 ? 7 : 4);
    const std::string lit = std::to_string(rng_.between(1, 9));
    switch (k) {
      case 0: w_.line(v.name + " += " + (o.empty() ? lit : o) + ";"); break;
      case 1: w_.line(v.name + " = " + v.name + " * " + lit + ";"); break;
      case 2: w_.line(v.name + (rng_.coin() ? "--;" : "++;")); break;
      case 3: {
        const auto arrs = env.of_type("int[]");
        if (!arrs.empty()) w_.line(v.name + " = len(" + arrs.front()->name + ");");
        else w_.line("log(toStr(" + v.name + "));");
        break;
      }
      case 4: {
        const auto strs = env.of_type("string");
        if (!strs.empty()) w_.line(v.name + " = parseInt(" + strs.front()->name + ");");
        else w_.line(v.name + " -= " + lit + ";");
        break;
      }
      case 5: nested("if (" + v.name + " > " + (o.empty() ? lit : o) + ")", depth); break;
      case 6: {
        w_.open("while (" + v.name + " < " + (o.empty() ? lit : o) + ")");
        env.push();
        if (rng_.coin()) statement(depth + 1);
        w_.line(v.name + "++;");
        env.pop();
        w_.close();
        break;
      }
      default: {
        if (distinct_) {
          nested("if (" + v.name + " != " + lit + ")", depth);
          break;
        }
        const std::string i = names_.fresh(kCounterNames);
        w_.open("for (int " + i + " = 0; " + i + " < " + v.name + "; " + i + "++)");
        env.push();
        env.add({i, "int"});
        const auto arrs = env.of_type("int[]");
        const auto ints = env.of_type("int");
        if (!arrs.empty() && ints.size() > 2) {
          std::string acc;
          for (const Var* x : ints)
            if (x->name != i && x->name != v.name) acc = x->name;
          w_.line(acc + " += " + arrs.front()->name + "[" + i + "];");
        } else {
          statement(depth + 1);
        }
        env.pop();
        w_.close();
      }
    }
  }

  void bool_stmt(const Var& v, int depth) {
    switch (rng_.between(0, depth < 2 ? 3 : 1)) {
      case 0: w_.line(v.name + " = !" + v.name + ";"); break;
      case 1: {
        const std::string o = other("bool", v.name);
        w_.line(v.name + " = " + (o.empty() ? (rng_.coin() ? "true" : "false") : v.name + " && " + o) + ";");
        break;
      }
      case 2: nested("if (" + v.name + ")", depth); break;
      default: nested("if (!" + v.name + ")", depth); break;
    }
  }

  void string_stmt(const Var& v, int depth) {
    const std::string o = other("string", v.name);
    switch (rng_.between(0, depth < 2 ? 5 : 3)) {
      case 0: w_.line(v.name + " = " + v.name + " + " + literal_for(rng_, "string") + ";"); break;
      case 1: w_.line("log(" + v.name + ");"); break;
      case 2: w_.line(v.name + " = trim(" + v.name + ");"); break;
      case 3:
        if (!o.empty()) w_.line(v.name + " = joinPath(" + o + ", " + v.name + ");");
        else w_.line(v.name + " = baseName(" + v.name + ");");
        break;
      case 4: nested("if (exists(" + v.name + "))", depth); break;
      default: {
        const auto bools = env.of_type("bool");
        if (!bools.empty()) w_.line(bools.front()->name + " = exists(" + v.name + ");");
        else nested("if (" + v.name + " == " + literal_for(rng_, "string") + ")", depth);
      }
    }
  }

  void array_stmt(const Var& v, int) {
    switch (rng_.between(0, 2)) {
      case 0:
        w_.line(v.name + "[" + std::to_string(rng_.between(0, 9)) + "] = " + std::to_string(rng_.between(0, 9)) + ";");
        break;
      case 1: w_.line("sortInts(" + v.name + ");"); break;
      default: w_.line(v.name + " = newInts(" + std::to_string(rng_.between(1, 9)) + ");"); break;
    }
  }

  void object_stmt(const Var& v, int depth) {
    // pick a function declared on the variable's type or one of its supertypes
    std::vector<std::string> types{v.type};
    auto it = pt_.supers.find(v.type);
    if (it != pt_.supers.end()) types.insert(types.end(), it->second.begin(), it->second.end());
    const std::string t = rng_.pick(types);
    switch (rng_.between(0, depth < 2 ? 4 : 3)) {
      case 0: w_.line("touch" + t + "(" + v.name + ");"); break;
      case 1: {
        const auto strs = env.of_type("string");
        if (!strs.empty()) w_.line(strs.front()->name + " = nameOf" + t + "(" + v.name + ");");
        else w_.line("log(nameOf" + t + "(" + v.name + "));");
        break;
      }
      case 2: {
        const auto ints = env.of_type("int");
        if (!ints.empty()) w_.line(ints.front()->name + " += sizeOf" + t + "(" + v.name + ");");
        else w_.line("touch" + t + "(" + v.name + ");");
        break;
      }
      case 3: w_.line(v.name + " = make" + v.type + "();"); break;
      default: nested("if (is" + t + "Ready(" + v.name + "))", depth); break;
    }
  }

  Rng& rng_;
  Writer& w_;
  Names& names_;
  const ProjectTypes& pt_;
  bool distinct_;
};

void emit_typed_function(Rng& rng, Writer& w, const ProjectTypes& pt, const std::string& fname, bool distinct) {
  Names names(rng);
  std::vector<std::string> types;
  if (distinct) {
    std::vector<std::string> pool = {"int", "bool", "string", "int[]"};
    pool.insert(pool.end(), pt.nominal.begin(), pt.nominal.end());
    rng.shuffle(pool);
    types.assign(pool.begin(), pool.begin() + rng.between(3, std::min<int>(5, static_cast<int>(pool.size()))));
  } else {
    const int ints = rng.between(2, 4), strs = rng.between(1, 3), bools = rng.between(0, 2);
    types.insert(types.end(), static_cast<std::size_t>(ints), "int");
    types.insert(types.end(), static_cast<std::size_t>(strs), "string");
    types.insert(types.end(), static_cast<std::size_t>(bools), "bool");
    if (rng.coin(0.5)) types.push_back("int[]");
    const int objs = rng.between(1, 3);
    for (int k = 0; k < objs; ++k) types.push_back(rng.pick(pt.nominal));
    rng.shuffle(types);
  }
  const int nparams = rng.between(0, std::min<int>(3, static_cast<int>(types.size())));
  const bool returns_int = std::find(types.begin(), types.end(), "int") != types.end() && rng.coin(0.6);
  TypedBody body(rng, w, names, pt, distinct);
  std::string sig = std::string(returns_int ? "int " : "void ") + fname + "(";
  for (int k = 0; k < nparams; ++k) {
    const std::string n = names.fresh(pool_for(types[static_cast<std::size_t>(k)]));
    sig += (k ? ", " : "") + types[static_cast<std::size_t>(k)] + " " + n;
    body.env.add({n, types[static_cast<std::size_t>(k)]});
  }
  w.open(sig + ")");
  for (std::size_t k = static_cast<std::size_t>(nparams); k < types.size(); ++k) body.declare(types[k]);
  const int n = rng.between(3, 6);
  for (int k = 0; k < n; ++k) body.statement(0);
  if (returns_int) w.line("return " + body.env.of_type("int").front()->name + ";");
  w.close();
}

// ---------------------------------------------------------------- stress / straight

class StressBody {
 public:
  StressBody(Rng& rng, Writer& w, int budget, bool straight) : rng_(rng), w_(w), budget_(budget), straight_(straight) {}

  void run(std::vector<std::string> params) {
    env_ = std::move(params);
    while (budget_ > 1) statement(0, 0);
    w_.line("return " + rng_.pick(env_) + ";");
  }

 private:
  std::string fresh() { return "v" + std::to_string(counter_++); }
  std::string any() { return rng_.pick(env_); }
  std::string operand() { return rng_.coin(0.7) ? any() : std::to_string(rng_.between(0, 9)); }

  void block(int depth, int loops) {
    const std::size_t mark = env_.size();
    const int n = budget_ > 1 ? rng_.between(0, std::min(3, budget_ - 1)) : 0;
    for (int k = 0; k < n && budget_ > 1; ++k) statement(depth + 1, loops);
    env_.resize(mark);
  }

  void statement(int depth, int loops) {
    --budget_;
    int kind = straight_ ? rng_.between(0, 4) : rng_.between(0, 9);
    if (depth >= 3 && kind >= 5) kind = rng_.between(0, 4);
    if (loops >= 2 && (kind == 7 || kind == 8)) kind = 5;
    switch (kind) {
      case 0: w_.line(any() + " = " + operand() + " + " + operand() + ";"); break;
      case 1: w_.line(any() + " += " + operand() + ";"); break;
      case 2: w_.line(any() + (rng_.coin() ? "++;" : "--;")); break;
      case 3: {
        const std::string n = fresh();
        w_.line("int " + n + " = " + operand() + ";");
        env_.push_back(n);
        break;
      }
      case 4: w_.line(any() + " = " + any() + ";"); break;
      case 5:
      case 6: {
        w_.open("if (" + any() + " < " + operand() + ")");
        block(depth, loops);
        if (rng_.coin(0.4)) {
          w_.close(" else {");
          w_.indent();
          block(depth, loops);
          w_.close();
        } else {
          w_.close();
        }
        break;
      }
      case 7: {
        const std::string c = any();
        w_.open("while (" + c + " < " + operand() + ")");
        block(depth, loops + 1);
        w_.line(c + "++;");
        w_.close();
        break;
      }
      case 8: {
        const std::string i = fresh();
        w_.open("for (int " + i + " = 0; " + i + " < " + operand() + "; " + i + "++)");
        env_.push_back(i);
        block(depth, loops + 1);
        env_.pop_back();
        w_.close();
        break;
      }
      default: {
        w_.open("if (" + any() + " == " + operand() + ")");
        w_.line("return " + any() + ";");
        w_.close();
      }
    }
  }

  Rng& rng_;
  Writer& w_;
  int budget_;
  bool straight_;
  int counter_ = 0;
  std::vector<std::string> env_;
};

// Number of execution paths through a statement with every loop entry running
// 0..bound iterations: {paths that fall through, paths that return}.
std::pair<double, double> count_paths(const minilang::Ast& ast, minilang::NodeId id, int bound) {
  using minilang::NodeKind;
  const auto& n = ast[id];
  switch (n.kind) {
    case NodeKind::Block: {
      double f = 1, r = 0;
      for (auto k : n.kids) {
        const auto [fk, rk] = count_paths(ast, k, bound);
        r += f * rk;
        f *= fk;
      }
      return {f, r};
    }
    case NodeKind::Return: return {0, 1};
    case NodeKind::If: {
      const auto t = count_paths(ast, n.kids[1], bound);
      const auto e = n.kids[2] != minilang::kNoNode ? count_paths(ast, n.kids[2], bound) : std::pair{1.0, 0.0};
      return {t.first + e.first, t.second + e.second};
    }
    case NodeKind::While:
    case NodeKind::For: {
      const auto b = count_paths(ast, n.kids.back(), bound);
      double f = 0, r = 0, pw = 1;
      for (int k = 0; k <= bound; ++k) {
        f += pw;
        if (k < bound) r += pw * b.second;
        pw *= b.first;
      }
      return {f, r};
    }
    default: return {1, 0};
  }
}

constexpr double kMaxStressPaths = 20000;
constexpr int kOracleLoopBound = 3;

std::string function_name(Rng& rng, std::set<std::string>& used) {
  for (;;) {
    std::string n = rng.pick(kFunctionVerbs) + rng.pick(kFunctionNouns);
    if (used.insert(n).second) return n;
    n += std::to_string(used.size());
    if (used.insert(n).second) return n;
  }
}

std::string generate_file(Rng& rng, const GenOptions& opt, const ProjectTypes& pt) {
  Writer w;
  std::set<std::string> fnames;
  std::string head;
  switch (opt.profile) {
    case Profile::Loops: head = "extern fn len(int[]) -> int;\n"; break;
    case Profile::Mixed:
    case Profile::TypeSep: head = pt.decls; break;
    default: break;
  }
  for (int f = 0; f < opt.functions_per_file; ++f) {
    if (f > 0) w.blank();
    const std::string name = function_name(rng, fnames);
    switch (opt.profile) {
      case Profile::Loops: emit_loop_function(rng, w, name); break;
      case Profile::TypeSep: emit_typed_function(rng, w, pt, name, true); break;
      case Profile::Mixed:
        if (rng.coin(0.3)) emit_loop_function(rng, w, name);
        else emit_typed_function(rng, w, pt, name, false);
        break;
      case Profile::Stress:
      case Profile::Straight: {
        const int np = rng.between(1, 3);
        std::vector<std::string> params;
        std::string sig = "int " + name + "(";
        for (int k = 0; k < np; ++k) {
          params.push_back(std::string(1, static_cast<char>('a' + k)));
          sig += (k ? ", int " : "int ") + params.back();
        }
        // keep exhaustive path enumeration cheap enough for oracle comparisons
        for (;;) {
          Writer fw;
          fw.open(sig + ")");
          StressBody(rng, fw, rng.between(2, std::max(2, opt.max_statements)), opt.profile == Profile::Straight)
              .run(params);
          fw.close();
          std::string text = fw.take();
          const auto prog = minilang::compile(text);
          const auto fn = prog.ast.functions()[0];
          const auto [f, r] = count_paths(prog.ast, prog.ast[fn].kids.back(), kOracleLoopBound);
          if (f + r <= kMaxStressPaths) {
            w.raw(text);
            break;
          }
        }
        break;
      }
    }
  }
  return head + (head.empty() ? "" : "\n") + w.take();
}

}  // namespace

std::vector<SourceFile> generate_corpus(const GenOptions& opt) {
  if (opt.projects < 0 || opt.files_per_project < 0 || opt.functions_per_file < 1)
    throw std::invalid_argument("generate_corpus: bad sizes");
  Rng master(opt.seed);
  std::vector<SourceFile> out;
  for (int p = 0; p < opt.projects; ++p) {
    Rng prng(master.next());
    const ProjectTypes pt = make_project_types(prng, p, opt.profile == Profile::Mixed);
    char pname[32];
    std::snprintf(pname, sizeof pname, "proj%03d", p);
    for (int f = 0; f < opt.files_per_project; ++f) {
      char fname[32];
      std::snprintf(fname, sizeof fname, "file%03d.ml0", f);
      SourceFile sf{pname, fname, generate_file(prng, opt, pt)};
      try {
        minilang::compile(sf.text, sf.id());
      } catch (const std::exception& e) {
        throw std::logic_error("generator produced an ill-typed program " + sf.id() + ": " + e.what() + "\n" + sf.text);
      }
      out.push_back(std::move(sf));
    }
  }
  return out;
}

void write_corpus(const std::string& dir, const std::vector<SourceFile>& files) {
  for (const auto& f : files) {
    const fs::path d = fs::path(dir) / f.project;
    fs::create_directories(d);
    std::ofstream out(d / f.name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (d / f.name).string());
    out << f.text;
  }
}

std::vector<SourceFile> read_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("corpus directory not found: " + dir);
  std::vector<SourceFile> out;
  for (const auto& proj : fs::directory_iterator(dir)) {
    if (!proj.is_directory()) continue;
    for (const auto& file : fs::directory_iterator(proj.path())) {
      if (file.path().extension() != ".ml0") continue;
      std::ifstream in(file.path(), std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      out.push_back({proj.path().filename().string(), file.path().filename().string(), ss.str()});
    }
  }
  std::sort(out.begin(), out.end(), [](const SourceFile& a, const SourceFile& b) { return a.id() < b.id(); });
  return out;
}

CorpusSplit split_corpus(const std::vector<SourceFile>& files, std::uint64_t seed, double unseen_fraction) {
  if (unseen_fraction < 0 || unseen_fraction > 1) throw std::invalid_argument("unseen fraction must be in [0, 1]");
  std::vector<std::string> projects;
  for (const auto& f : files)
    if (std::find(projects.begin(), projects.end(), f.project) == projects.end()) projects.push_back(f.project);
  std::sort(projects.begin(), projects.end());
  Rng rng(seed);
  rng.shuffle(projects);
  const auto n_unseen = static_cast<std::size_t>(unseen_fraction * static_cast<double>(projects.size()) + 0.5);
  const std::set<std::string> unseen(projects.begin(), projects.begin() + static_cast<long>(std::min(n_unseen, projects.size())));

  CorpusSplit split;
  std::vector<std::string> rest;
  for (const auto& f : files) (unseen.count(f.project) ? split.unseen_test : rest).push_back(f.id());
  std::sort(rest.begin(), rest.end());
  rng.shuffle(rest);
  const std::size_t n = rest.size();
  const auto n_train = static_cast<std::size_t>(0.60 * static_cast<double>(n) + 0.5);
  const auto n_valid = static_cast<std::size_t>(0.05 * static_cast<double>(n) + 0.5);
  split.train.assign(rest.begin(), rest.begin() + static_cast<long>(std::min(n_train, n)));
  split.valid.assign(rest.begin() + static_cast<long>(std::min(n_train, n)),
                     rest.begin() + static_cast<long>(std::min(n_train + n_valid, n)));
  split.test.assign(rest.begin() + static_cast<long>(std::min(n_train + n_valid, n)), rest.end());
  if (split.train.empty() || split.valid.empty() || split.test.empty() ||
      (n_unseen > 0 && split.unseen_test.empty()))
    throw InsufficientData("corpus too small for a 60/5/35 split with " + std::to_string(n_unseen) +
                           " unseen project(s)");
  std::sort(split.unseen_test.begin(), split.unseen_test.end());
  return split;
}

}  // namespace smartpaste::taskgen
