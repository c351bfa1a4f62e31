#include "support.hpp"

#include <charconv>
#include <cstring>

namespace support {

namespace fs = std::filesystem;

TempDir::TempDir() {
  char tmpl[] = "/tmp/ddsflow-test-XXXXXX";
  if (!mkdtemp(tmpl)) throw std::runtime_error("mkdtemp failed");
  path = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path, ec);
}

// ---- reference expression interpreter ------------------------------------
// Evaluates straight off the text with its own scanner; no AST, no code
// shared with the production evaluator.

namespace {

struct RV {
  enum T { STR, NUM, BOOL, ERR } t = ERR;
  std::string s;
  double n = 0;
  bool b = false;

  static RV err() { return {}; }
  static RV str(std::string v) { return {STR, std::move(v)}; }
  static RV num(double v) { return {NUM, "", v}; }
  static RV boolean(bool v) { return {BOOL, "", 0, v}; }
};

// strict decimal grammar: -?(digits[.digits?]|.digits)([eE][+-]?digits)?
bool ref_grammar_ok(const std::string& s) {
  size_t i = 0, n = s.size();
  if (n == 0) return false;
  if (s[i] == '-') ++i;
  size_t int_digits = 0, frac_digits = 0;
  while (i < n && isdigit((unsigned char)s[i])) ++i, ++int_digits;
  if (i < n && s[i] == '.') {
    ++i;
    while (i < n && isdigit((unsigned char)s[i])) ++i, ++frac_digits;
  }
  if (int_digits + frac_digits == 0) return false;
  if (i < n && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < n && (s[i] == '+' || s[i] == '-')) ++i;
    size_t exp_digits = 0;
    while (i < n && isdigit((unsigned char)s[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  return i == n;
}

RV ref_coerce_num(const RV& v) {
  if (v.t == RV::ERR) return v;
  if (v.t == RV::NUM) return v;
  if (v.t == RV::STR && ref_grammar_ok(v.s)) {
    double out = 0;
    std::from_chars(v.s.data(), v.s.data() + v.s.size(), out);
    return RV::num(out);
  }
  return RV::err();
}

std::string ref_num_text(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string ref_text(const RV& v) {
  switch (v.t) {
    case RV::STR: return v.s;
    case RV::NUM: return ref_num_text(v.n);
    case RV::BOOL: return v.b ? "true" : "false";
    case RV::ERR: return "";
  }
  return "";
}

class Ref {
 public:
  Ref(const std::string& s, const doc::CanonicalDoc& d) : s_(s), d_(d) {}

  RV run() {
    RV v = level_or();
    ws();
    if (pos_ != s_.size()) throw std::runtime_error("ref: trailing input");
    return v;
  }

 private:
  void ws() {
    while (pos_ < s_.size() && isspace((unsigned char)s_[pos_])) ++pos_;
  }

  bool word(const char* w) {
    ws();
    size_t n = std::strlen(w);
    if (s_.compare(pos_, n, w) != 0) return false;
    size_t after = pos_ + n;
    if (after < s_.size() &&
        (isalnum((unsigned char)s_[after]) || s_[after] == '_'))
      return false;
    pos_ = after;
    return true;
  }

  static RV need_bool(const RV& v) {
    if (v.t == RV::ERR || v.t == RV::BOOL) return v;
    return RV::err();
  }

  RV level_or() {
    RV acc = level_and();
    bool joined = false;
    while (word("or")) {
      RV rhs = level_and();
      if (!joined) acc = need_bool(acc), joined = true;
      if (acc.t == RV::ERR) continue;
      rhs = need_bool(rhs);
      if (rhs.t == RV::ERR) { acc = rhs; continue; }
      acc.b = acc.b || rhs.b;
    }
    return acc;
  }

  RV level_and() {
    RV acc = level_not();
    bool joined = false;
    while (word("and")) {
      RV rhs = level_not();
      if (!joined) acc = need_bool(acc), joined = true;
      if (acc.t == RV::ERR) continue;
      rhs = need_bool(rhs);
      if (rhs.t == RV::ERR) { acc = rhs; continue; }
      acc.b = acc.b && rhs.b;
    }
    return acc;
  }

  RV level_not() {
    if (word("not")) {
      RV v = need_bool(level_not());
      if (v.t == RV::BOOL) v.b = !v.b;
      return v;
    }
    return level_cmp();
  }

  RV level_cmp() {
    RV a = term();
    ws();
    static const char* ops[] = {"==", "!=", "<=", ">=", "<", ">"};
    for (const char* op : ops) {
      if (s_.compare(pos_, std::strlen(op), op) == 0) {
        pos_ += std::strlen(op);
        RV b = term();
        return compare(op, a, b);
      }
    }
    return a;
  }

  static RV compare(const std::string& op, const RV& a, const RV& b) {
    if (a.t == RV::ERR) return a;
    if (b.t == RV::ERR) return b;
    if (op == "==" || op == "!=") {
      bool eq;
      if (a.t == b.t) {
        if (a.t == RV::STR) eq = a.s == b.s;
        else if (a.t == RV::NUM) eq = a.n == b.n;
        else eq = a.b == b.b;
      } else if ((a.t == RV::NUM && b.t == RV::STR) ||
                 (a.t == RV::STR && b.t == RV::NUM)) {
        RV na = ref_coerce_num(a), nb = ref_coerce_num(b);
        if (na.t == RV::ERR || nb.t == RV::ERR) return RV::err();
        eq = na.n == nb.n;
      } else {
        return RV::err();
      }
      return RV::boolean(op == "==" ? eq : !eq);
    }
    RV na = ref_coerce_num(a), nb = ref_coerce_num(b);
    if (na.t == RV::ERR || nb.t == RV::ERR) return RV::err();
    if (op == "<") return RV::boolean(na.n < nb.n);
    if (op == "<=") return RV::boolean(na.n <= nb.n);
    if (op == ">") return RV::boolean(na.n > nb.n);
    return RV::boolean(na.n >= nb.n);
  }

  std::vector<std::string> scan_path() {
    ws();
    if (pos_ >= s_.size() || s_[pos_] != '$')
      throw std::runtime_error("ref: expected path");
    ++pos_;
    std::string raw;
    while (pos_ < s_.size() &&
           (isalnum((unsigned char)s_[pos_]) || s_[pos_] == '_' ||
            s_[pos_] == '.' || s_[pos_] == '#' || s_[pos_] == '-'))
      raw += s_[pos_++];
    std::vector<std::string> parts;
    std::string cur;
    for (char c : raw) {
      if (c == '.') { parts.push_back(cur); cur.clear(); }
      else cur += c;
    }
    parts.push_back(cur);
    return parts;
  }

  // walk: root name, then attrs first, then first child by name
  enum class Hit { MISSING, SCALAR, ELEMENT };
  Hit walk(const std::vector<std::string>& parts, std::string& scalar,
           const doc::Node*& node) const {
    if (parts.empty() || parts[0] != d_.name) return Hit::MISSING;
    const doc::Node* cur = &d_;
    for (size_t i = 1; i < parts.size(); ++i) {
      auto a = cur->attrs.find(parts[i]);
      if (a != cur->attrs.end()) {
        if (i + 1 != parts.size()) return Hit::MISSING;
        scalar = a->second;
        return Hit::SCALAR;
      }
      const doc::Node* next = nullptr;
      for (const doc::Node& c : cur->children)
        if (c.name == parts[i]) { next = &c; break; }
      if (!next) return Hit::MISSING;
      cur = next;
    }
    node = cur;
    return Hit::ELEMENT;
  }

  RV path_term() {
    auto parts = scan_path();
    std::string scalar;
    const doc::Node* node = nullptr;
    switch (walk(parts, scalar, node)) {
      case Hit::MISSING: return RV::err();
      case Hit::SCALAR: return RV::str(scalar);
      case Hit::ELEMENT:
        if (node->text) return RV::str(*node->text);
        return RV::err();
    }
    return RV::err();
  }

  RV term() {
    ws();
    if (pos_ >= s_.size()) throw std::runtime_error("ref: expected term");
    char c = s_[pos_];
    if (c == '$') return path_term();
    if (c == '"') {
      ++pos_;
      std::string out;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        char k = s_[pos_++];
        if (k == '\\') {
          char e = s_[pos_++];
          if (e == 'n') out += '\n';
          else if (e == 't') out += '\t';
          else out += e;
        } else {
          out += k;
        }
      }
      ++pos_;
      return RV::str(out);
    }
    if (isdigit((unsigned char)c) ||
        (c == '-' && pos_ + 1 < s_.size() &&
         isdigit((unsigned char)s_[pos_ + 1]))) {
      size_t start = pos_;
      if (s_[pos_] == '-') ++pos_;
      while (pos_ < s_.size() &&
             (isdigit((unsigned char)s_[pos_]) || s_[pos_] == '.' ||
              s_[pos_] == 'e' || s_[pos_] == 'E' ||
              ((s_[pos_] == '+' || s_[pos_] == '-') &&
               (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
        ++pos_;
      std::string text = s_.substr(start, pos_ - start);
      double v = 0;
      auto r = std::from_chars(text.data(), text.data() + text.size(), v);
      if (r.ec != std::errc() || r.ptr != text.data() + text.size())
        throw std::runtime_error("ref: bad number");
      return RV::num(v);
    }
    if (word("true")) return RV::boolean(true);
    if (word("false")) return RV::boolean(false);
    // function call
    std::string name;
    while (pos_ < s_.size() &&
           (isalnum((unsigned char)s_[pos_]) || s_[pos_] == '_'))
      name += s_[pos_++];
    ws();
    if (pos_ >= s_.size() || s_[pos_] != '(')
      throw std::runtime_error("ref: expected call");
    ++pos_;
    if (name == "exists") {
      auto parts = scan_path();
      ws();
      if (s_[pos_] != ')') throw std::runtime_error("ref: expected )");
      ++pos_;
      std::string scalar;
      const doc::Node* node = nullptr;
      return RV::boolean(walk(parts, scalar, node) != Hit::MISSING);
    }
    std::vector<RV> args;
    ws();
    if (s_[pos_] != ')') {
      args.push_back(level_or());
      ws();
      while (pos_ < s_.size() && s_[pos_] == ',') {
        ++pos_;
        args.push_back(level_or());
        ws();
      }
    }
    if (pos_ >= s_.size() || s_[pos_] != ')')
      throw std::runtime_error("ref: expected )");
    ++pos_;
    for (const RV& a : args)
      if (a.t == RV::ERR && name != "num") return RV::err();
    if (name == "num") {
      if (args.size() != 1) throw std::runtime_error("ref: num arity");
      return ref_coerce_num(args[0]);
    }
    if (name == "str") {
      if (args.size() != 1) throw std::runtime_error("ref: str arity");
      return RV::str(ref_text(args[0]));
    }
    if (name == "concat") {
      std::string out;
      for (const RV& a : args) out += ref_text(a);
      return RV::str(out);
    }
    throw std::runtime_error("ref: unknown function " + name);
  }

  const std::string& s_;
  size_t pos_ = 0;
  const doc::CanonicalDoc& d_;
};

std::string rv_repr(const RV& v) {
  switch (v.t) {
    case RV::STR: {
      std::string out = "\"";
      for (char c : v.s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') { out += "\\n"; continue; }
        if (c == '\t') { out += "\\t"; continue; }
        out += c;
      }
      return out + "\"";
    }
    case RV::NUM: return ref_num_text(v.n);
    case RV::BOOL: return v.b ? "true" : "false";
    case RV::ERR: return "ERROR";
  }
  return "?";
}

}  // namespace

std::string ref_eval(const std::string& text, const doc::CanonicalDoc& d) {
  return rv_repr(Ref(text, d).run());
}

std::string normalize_repr(std::string repr) {
  if (repr.rfind("ERROR", 0) == 0) return "ERROR";
  return repr;
}

// ---- random generators ---------------------------------------------------

static int pick(Rng& rng, int n) {
  return (int)(rng() % (uint64_t)n);
}

static std::string rand_word(Rng& rng) {
  static const char* words[] = {"qty", "id",  "amount", "part", "lot",
                                "rev", "who", "site",   "kind", "flag"};
  return words[pick(rng, 10)];
}

static std::string rand_value(Rng& rng) {
  switch (pick(rng, 5)) {
    case 0: return std::to_string(pick(rng, 1000));
    case 1: return std::to_string(pick(rng, 100)) + "." + std::to_string(pick(rng, 10));
    case 2: return rand_word(rng);
    case 3: return pick(rng, 2) ? "true" : "false";
    default: return "";
  }
}

doc::CanonicalDoc random_doc(Rng& rng, int depth) {
  doc::CanonicalDoc d;
  d.name = rand_word(rng);
  int attrs = pick(rng, 4);
  for (int i = 0; i < attrs; ++i) d.attrs[rand_word(rng)] = rand_value(rng);
  if (depth < 3) {
    int kids = pick(rng, depth == 0 ? 4 : 3);
    for (int i = 0; i < kids; ++i) d.children.push_back(random_doc(rng, depth + 1));
  }
  if (pick(rng, 3) == 0) d.text = rand_value(rng);
  return d;
}

namespace {

using expr::Expr;
using expr::ExprPtr;

ExprPtr mk(Expr e) { return std::make_shared<Expr>(std::move(e)); }

ExprPtr rand_term(Rng& rng, int depth);
ExprPtr rand_or(Rng& rng, int depth);

ExprPtr rand_path_expr(Rng& rng) {
  Expr e;
  e.kind = Expr::Kind::Path;
  e.path.parts.push_back(rand_word(rng));
  int extra = 1 + pick(rng, 2);
  for (int i = 0; i < extra; ++i) e.path.parts.push_back(rand_word(rng));
  return mk(std::move(e));
}

ExprPtr rand_term(Rng& rng, int depth) {
  switch (pick(rng, depth >= 3 ? 4 : 5)) {
    case 0: return rand_path_expr(rng);
    case 1: {
      Expr e;
      e.kind = Expr::Kind::StrLit;
      e.str = rand_value(rng);
      if (pick(rng, 6) == 0) e.str += "\n\"x\\";
      return mk(std::move(e));
    }
    case 2: {
      Expr e;
      e.kind = Expr::Kind::NumLit;
      int v = pick(rng, 2000) - 1000;
      e.num = pick(rng, 2) ? (double)v : v / 8.0;
      return mk(std::move(e));
    }
    case 3: {
      Expr e;
      e.kind = Expr::Kind::BoolLit;
      e.boolean = pick(rng, 2) == 1;
      return mk(std::move(e));
    }
    default: {
      Expr e;
      e.kind = Expr::Kind::Call;
      switch (pick(rng, 4)) {
        case 0:
          e.str = "exists";
          e.kids.push_back(rand_path_expr(rng));
          break;
        case 1:
          e.str = "num";
          e.kids.push_back(rand_or(rng, depth + 1));
          break;
        case 2:
          e.str = "str";
          e.kids.push_back(rand_or(rng, depth + 1));
          break;
        default: {
          e.str = "concat";
          int n = pick(rng, 3);
          for (int i = 0; i < n; ++i)
            e.kids.push_back(rand_or(rng, depth + 1));
          break;
        }
      }
      return mk(std::move(e));
    }
  }
}

ExprPtr rand_cmp(Rng& rng, int depth) {
  ExprPtr lhs = rand_term(rng, depth);
  if (pick(rng, 2) == 0) return lhs;
  static const char* ops[] = {"==", "!=", "<", "<=", ">", ">="};
  Expr e;
  e.kind = Expr::Kind::Cmp;
  e.str = ops[pick(rng, 6)];
  e.kids = {lhs, rand_term(rng, depth)};
  return mk(std::move(e));
}

ExprPtr rand_not(Rng& rng, int depth) {
  if (depth < 4 && pick(rng, 4) == 0) {
    Expr e;
    e.kind = Expr::Kind::Not;
    e.kids.push_back(rand_not(rng, depth + 1));
    return mk(std::move(e));
  }
  return rand_cmp(rng, depth);
}

ExprPtr rand_and(Rng& rng, int depth) {
  int n = depth >= 3 ? 1 : 1 + (pick(rng, 3) == 0 ? pick(rng, 2) + 1 : 0);
  if (n == 1) return rand_not(rng, depth);
  Expr e;
  e.kind = Expr::Kind::And;
  for (int i = 0; i < n; ++i) e.kids.push_back(rand_not(rng, depth + 1));
  return mk(std::move(e));
}

ExprPtr rand_or(Rng& rng, int depth) {
  int n = depth >= 3 ? 1 : 1 + (pick(rng, 3) == 0 ? pick(rng, 2) + 1 : 0);
  if (n == 1) return rand_and(rng, depth);
  Expr e;
  e.kind = Expr::Kind::Or;
  for (int i = 0; i < n; ++i) e.kids.push_back(rand_and(rng, depth + 1));
  return mk(std::move(e));
}

}  // namespace

expr::ExprPtr random_expr(Rng& rng, int depth) { return rand_or(rng, depth); }

// ---- random workflow graphs ----------------------------------------------

namespace {

using meta::ActivityDef;
using meta::SplitKind;
using meta::WorkflowGraph;

struct GraphGen {
  WorkflowGraph g;
  Rng& rng;
  double loop_prob;
  int counter = 0;

  explicit GraphGen(Rng& r, double lp) : rng(r), loop_prob(lp) {}

  std::string fresh() {
    std::string id(1, (char)('A' + counter % 26));
    if (counter >= 26) id += std::to_string(counter / 26);
    ++counter;
    g.nodes.push_back({.id = id});
    return id;
  }

  ActivityDef& node(const std::string& id) {
    for (ActivityDef& n : g.nodes)
      if (n.id == id) return n;
    throw std::logic_error("gen: no node " + id);
  }

  void edge(const std::string& from, const std::string& to,
            std::optional<std::string> guard = std::nullopt,
            bool is_default = false) {
    g.edges.push_back({from, to, std::move(guard), is_default});
  }

  static std::string steer(const std::string& target) {
    return "$o.pick == \"" + target + "\"";
  }

  // returns {entry, exit}; edges to entry / from exit added by caller
  std::pair<std::string, std::string> block(int& budget, int depth) {
    int roll = pick(rng, 10);
    if (budget >= 4 && depth < 3 && roll < 2) {  // AND block
      budget -= 4;
      std::string s = fresh(), j = fresh();
      node(s).split = SplitKind::AND;
      node(j).join = SplitKind::AND;
      for (int b = 0; b < 2; ++b) {
        auto [en, ex] = block(budget, depth + 1);
        edge(s, en);
        edge(ex, j);
      }
      return {s, j};
    }
    if (budget >= 4 && depth < 3 && roll < 4) {  // XOR block
      budget -= 4;
      std::string s = fresh(), j = fresh();
      node(s).split = SplitKind::XOR;
      node(j).join = SplitKind::XOR;
      auto [en1, ex1] = block(budget, depth + 1);
      auto [en2, ex2] = block(budget, depth + 1);
      edge(s, en1, steer(en1));
      edge(s, en2, std::nullopt, true);
      edge(ex1, j);
      edge(ex2, j);
      return {s, j};
    }
    if (budget >= 2 && depth < 4 && roll < 7) {  // sequence
      budget -= 2;
      auto [en1, ex1] = block(budget, depth + 1);
      auto [en2, ex2] = block(budget, depth + 1);
      edge(ex1, en2);
      return {en1, ex2};
    }
    budget -= 1;
    std::string id = fresh();
    return {id, id};
  }

  // wrap (entry, exit) in a back edge: exit -> l, l -guard-> entry,
  // l -default-> f, so loops stay XOR-legal
  std::pair<std::string, std::string> add_loop(
      std::pair<std::string, std::string> be) {
    std::string l = fresh(), f = fresh();
    node(l).split = SplitKind::XOR;
    node(be.first).join = SplitKind::XOR;
    edge(be.second, l);
    edge(l, be.first, steer(be.first));
    edge(l, f, std::nullopt, true);
    return {be.first, f};
  }
};

}  // namespace

meta::WorkflowGraph random_graph(Rng& rng, int max_acts, double loop_prob) {
  GraphGen gen(rng, loop_prob);
  int budget = 1 + pick(rng, max_acts);
  auto be = gen.block(budget, 0);
  if (gen.counter + 2 <= max_acts &&
      (double)(rng() % 1000) / 1000.0 < loop_prob)
    be = gen.add_loop(be);
  gen.g.start = "start";
  gen.g.end = "end";
  gen.g.nodes.insert(gen.g.nodes.begin(), {.id = "start"});
  gen.g.nodes.push_back({.id = "end"});
  gen.edge("start", be.first);
  gen.edge(be.second, "end");
  // entry may have picked up a loop back edge; keep join consistent
  return gen.g;
}

meta::WorkflowGraph mutate_graph(const meta::WorkflowGraph& base, Rng& rng) {
  WorkflowGraph g = base;
  int edits = 1 + pick(rng, 3);
  int fresh = 0;
  for (int k = 0; k < edits; ++k) {
    int kind = pick(rng, 3);
    if (kind == 0 && !g.edges.empty()) {  // insert a pass-through node
      int ei = pick(rng, (int)g.edges.size());
      meta::TransitionDef e = g.edges[ei];
      std::string id = "n" + std::to_string(fresh++);
      bool taken = false;
      for (const ActivityDef& n : g.nodes) taken |= n.id == id;
      if (taken) continue;
      g.nodes.push_back({.id = id});
      g.edges[ei].to = id;
      g.edges.push_back({id, e.to, std::nullopt, false});
    } else if (kind == 1) {  // splice out a plain node
      for (int attempt = 0; attempt < 8; ++attempt) {
        int ni = pick(rng, (int)g.nodes.size());
        const ActivityDef n = g.nodes[ni];
        if (n.id == g.start || n.id == g.end) continue;
        if (n.split != SplitKind::NONE || n.join != SplitKind::NONE) continue;
        int in = -1, out = -1, ins = 0, outs = 0;
        for (size_t i = 0; i < g.edges.size(); ++i) {
          if (g.edges[i].to == n.id) { in = (int)i; ++ins; }
          if (g.edges[i].from == n.id) { out = (int)i; ++outs; }
        }
        if (ins != 1 || outs != 1) continue;
        std::string from = g.edges[in].from, to = g.edges[out].to;
        if (from == to) continue;
        bool dup = false;
        for (const auto& e : g.edges)
          dup |= e.from == from && e.to == to;
        if (dup) continue;
        g.edges[in].to = to;
        g.edges.erase(g.edges.begin() + out);
        g.nodes.erase(g.nodes.begin() + ni);
        break;
      }
    } else {  // rename a node (guards referencing it go stale, legally)
      for (int attempt = 0; attempt < 8; ++attempt) {
        int ni = pick(rng, (int)g.nodes.size());
        ActivityDef& n = g.nodes[ni];
        if (n.id == g.start || n.id == g.end) continue;
        std::string id = "r" + std::to_string(fresh++);
        bool taken = false;
        for (const ActivityDef& m : g.nodes) taken |= m.id == id;
        if (taken) continue;
        for (auto& e : g.edges) {
          if (e.from == n.id) e.from = id;
          if (e.to == n.id) e.to = id;
        }
        n.id = id;
        break;
      }
    }
  }
  return g;
}

doc::CanonicalDoc pick_doc(const std::string& target) {
  doc::CanonicalDoc d;
  d.name = "o";
  d.attrs["pick"] = target;
  return d;
}

static void random_step(enact::Item& it, const meta::DescriptionRepo& repo,
                        Rng& rng) {
  std::vector<std::string> ready = enact::enabled(it);
  if (ready.empty()) return;
  const std::string& act = ready[pick(rng, (int)ready.size())];
  meta::WorkflowGraph g = evo::effective_graph(it, repo);
  const meta::ActivityDef* def = g.node(act);
  doc::CanonicalDoc outcome = pick_doc("-");
  if (def && def->split == meta::SplitKind::XOR) {
    auto outs = g.out_edges(act);
    if (!outs.empty())
      outcome = pick_doc(outs[pick(rng, (int)outs.size())]->to);
  }
  enact::fire(it, repo, act, enact::EventKind::START, "tester");
  enact::fire(it, repo, act, enact::EventKind::COMPLETE, "tester", outcome);
}

void random_run(enact::Item& it, const meta::DescriptionRepo& repo, Rng& rng,
                int max_completes) {
  int n = pick(rng, max_completes + 1);
  for (int i = 0; i < n; ++i) {
    if (enact::enabled(it).empty()) break;
    random_step(it, repo, rng);
  }
}

void random_run(System& sys, const std::string& item_id, Rng& rng,
                int max_completes) {
  int n = pick(rng, max_completes + 1);
  for (int i = 0; i < n; ++i) {
    enact::Item& it = sys.item(item_id);
    std::vector<std::string> ready = enact::enabled(it);
    if (ready.empty()) break;
    const std::string& act = ready[pick(rng, (int)ready.size())];
    meta::WorkflowGraph g = evo::effective_graph(it, sys.repo());
    const meta::ActivityDef* def = g.node(act);
    doc::CanonicalDoc outcome = pick_doc("-");
    if (def && def->split == meta::SplitKind::XOR) {
      auto outs = g.out_edges(act);
      if (!outs.empty())
        outcome = pick_doc(outs[pick(rng, (int)outs.size())]->to);
    }
    sys.fire(item_id, act, enact::EventKind::START, "tester");
    sys.fire(item_id, act, enact::EventKind::COMPLETE, "tester", outcome);
  }
}

std::string ref_route(
    const std::vector<std::pair<std::string, std::string>>& rules,
    const doc::CanonicalDoc& d) {
  for (const auto& [guard, target] : rules)
    if (ref_eval(guard, d) == "true") return target;
  return "dead-letter";
}

meta::VersionRef publish_seq(System& sys, const std::string& name,
                             const std::vector<std::string>& acts) {
  return sys.repo().publish(meta::DescKind::ITEM_DESC, name,
                            meta::graph_to_json(meta::sequence_graph(acts)));
}

eai::ConnectorSpec basic_connector(
    const std::string& inbound, bus::CommMode mode, doc::Format fmt,
    const std::vector<std::pair<std::string, std::string>>& transform,
    const std::vector<std::pair<std::string, std::string>>& routes) {
  eai::ConnectorSpec spec;
  spec.comm_mode = mode;
  spec.data_format = fmt;
  spec.inbound_endpoint = inbound;
  spec.behaviour = meta::sequence_graph({"handle"});
  for (const auto& [path, text] : transform)
    spec.transform.push_back(
        {doc::Path::parse(path), expr::parse_expr(text), text});
  for (const auto& [guard, target] : routes)
    spec.routes.push_back({expr::parse_expr(guard), guard, target});
  return spec;
}

}  // namespace support
