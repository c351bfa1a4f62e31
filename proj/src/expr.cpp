#include "ddsflow/expr.hpp"

#include <cctype>
#include <charconv>

namespace ddsflow::expr {

namespace {

struct Token {
  enum class Kind { Ident, Number, String, Path, Op, LParen, RParen, Comma, End };
  Kind kind;
  std::string text;
  double num = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) {}

  Token next() {
    skip_ws();
    if (pos_ >= s_.size()) return {Token::Kind::End, ""};
    char c = s_[pos_];
    if (c == '(') { ++pos_; return {Token::Kind::LParen, "("}; }
    if (c == ')') { ++pos_; return {Token::Kind::RParen, ")"}; }
    if (c == ',') { ++pos_; return {Token::Kind::Comma, ","}; }
    if (c == '$') return lex_path();
    if (c == '"') return lex_string();
    if (std::isdigit((unsigned char)c) ||
        (c == '-' && pos_ + 1 < s_.size() &&
         std::isdigit((unsigned char)s_[pos_ + 1])))
      return lex_number();
    if (std::isalpha((unsigned char)c) || c == '_') return lex_ident();
    static const char* ops[] = {"==", "!=", "<=", ">=", "<", ">"};
    for (const char* op : ops) {
      size_t n = std::strlen(op);
      if (s_.compare(pos_, n, op) == 0) {
        pos_ += n;
        return {Token::Kind::Op, op};
      }
    }
    throw Error(Errc::PARSE_ERROR,
                "unexpected character '" + std::string(1, c) + "' at offset " +
                    std::to_string(pos_));
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace((unsigned char)s_[pos_])) ++pos_;
  }
  Token lex_path() {
    size_t start = pos_++;
    while (pos_ < s_.size() &&
           (std::isalnum((unsigned char)s_[pos_]) || s_[pos_] == '_' ||
            s_[pos_] == '.' || s_[pos_] == '#' || s_[pos_] == '-'))
      ++pos_;
    return {Token::Kind::Path, s_.substr(start, pos_ - start)};
  }
  Token lex_string() {
    std::string out;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size())
          throw Error(Errc::PARSE_ERROR, "unterminated escape");
        char e = s_[pos_++];
        if (e == '"' || e == '\\') out += e;
        else if (e == 'n') out += '\n';
        else if (e == 't') out += '\t';
        else throw Error(Errc::PARSE_ERROR, "bad escape in string literal");
      } else {
        out += c;
      }
    }
    if (pos_ >= s_.size())
      throw Error(Errc::PARSE_ERROR, "unterminated string literal");
    ++pos_;
    return {Token::Kind::String, out};
  }
  Token lex_number() {
    size_t start = pos_;
    if (s_[pos_] == '-') ++pos_;
    while (pos_ < s_.size() &&
           (std::isdigit((unsigned char)s_[pos_]) || s_[pos_] == '.' ||
            s_[pos_] == 'e' || s_[pos_] == 'E' ||
            ((s_[pos_] == '+' || s_[pos_] == '-') &&
             (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
      ++pos_;
    std::string text = s_.substr(start, pos_ - start);
    double v = 0;
    auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size())
      throw Error(Errc::PARSE_ERROR, "bad number literal '" + text + "'");
    Token t{Token::Kind::Number, text};
    t.num = v;
    return t;
  }
  Token lex_ident() {
    size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum((unsigned char)s_[pos_]) || s_[pos_] == '_'))
      ++pos_;
    return {Token::Kind::Ident, s_.substr(start, pos_ - start)};
  }

  const std::string& s_;
  size_t pos_ = 0;
};

bool known_func(const std::string& name) {
  return name == "exists" || name == "concat" || name == "num" || name == "str";
}

class Parser {
 public:
  explicit Parser(const std::string& s) : lex_(s) { advance(); }

  ExprPtr parse() {
    ExprPtr e = parse_or();
    if (tok_.kind != Token::Kind::End)
      throw Error(Errc::PARSE_ERROR, "trailing input after expression");
    return e;
  }

 private:
  void advance() { tok_ = lex_.next(); }

  ExprPtr parse_or() {
    std::vector<ExprPtr> kids{parse_and()};
    while (tok_.kind == Token::Kind::Ident && tok_.text == "or") {
      advance();
      kids.push_back(parse_and());
    }
    if (kids.size() == 1) return kids[0];
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Or;
    e->kids = std::move(kids);
    return e;
  }

  ExprPtr parse_and() {
    std::vector<ExprPtr> kids{parse_not()};
    while (tok_.kind == Token::Kind::Ident && tok_.text == "and") {
      advance();
      kids.push_back(parse_not());
    }
    if (kids.size() == 1) return kids[0];
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::And;
    e->kids = std::move(kids);
    return e;
  }

  ExprPtr parse_not() {
    if (tok_.kind == Token::Kind::Ident && tok_.text == "not") {
      advance();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Not;
      e->kids.push_back(parse_not());
      return e;
    }
    return parse_cmp();
  }

  ExprPtr parse_cmp() {
    ExprPtr lhs = parse_term();
    if (tok_.kind == Token::Kind::Op) {
      std::string op = tok_.text;
      advance();
      ExprPtr rhs = parse_term();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Cmp;
      e->str = op;
      e->kids = {lhs, rhs};
      return e;
    }
    return lhs;
  }

  ExprPtr parse_term() {
    auto e = std::make_shared<Expr>();
    switch (tok_.kind) {
      case Token::Kind::Path:
        e->kind = Expr::Kind::Path;
        e->path = doc::Path::parse(tok_.text);
        advance();
        return e;
      case Token::Kind::Number:
        e->kind = Expr::Kind::NumLit;
        e->num = tok_.num;
        advance();
        return e;
      case Token::Kind::String:
        e->kind = Expr::Kind::StrLit;
        e->str = tok_.text;
        advance();
        return e;
      case Token::Kind::Ident: {
        std::string name = tok_.text;
        advance();
        if (name == "true" || name == "false") {
          e->kind = Expr::Kind::BoolLit;
          e->boolean = name == "true";
          return e;
        }
        if (!known_func(name))
          throw Error(Errc::PARSE_ERROR, "unknown function '" + name + "'");
        if (tok_.kind != Token::Kind::LParen)
          throw Error(Errc::PARSE_ERROR, "expected '(' after " + name);
        advance();
        e->kind = Expr::Kind::Call;
        e->str = name;
        if (tok_.kind != Token::Kind::RParen) {
          e->kids.push_back(parse_or());
          while (tok_.kind == Token::Kind::Comma) {
            advance();
            e->kids.push_back(parse_or());
          }
        }
        if (tok_.kind != Token::Kind::RParen)
          throw Error(Errc::PARSE_ERROR, "expected ')' in call to " + name);
        advance();
        if (name == "exists" &&
            (e->kids.size() != 1 || e->kids[0]->kind != Expr::Kind::Path))
          throw Error(Errc::PARSE_ERROR, "exists() takes a single path");
        if ((name == "num" || name == "str") && e->kids.size() != 1)
          throw Error(Errc::PARSE_ERROR, name + "() takes a single argument");
        return e;
      }
      default:
        throw Error(Errc::PARSE_ERROR, "expected a term");
    }
  }

  Lexer lex_;
  Token tok_{Token::Kind::End, ""};
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') { out += "\\n"; continue; }
    if (c == '\t') { out += "\\t"; continue; }
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

ExprPtr parse_expr(const std::string& text) { return Parser(text).parse(); }

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Path: return e.path.str();
    case Expr::Kind::StrLit: return quote(e.str);
    case Expr::Kind::NumLit: return doc::format_number(e.num);
    case Expr::Kind::BoolLit: return e.boolean ? "true" : "false";
    case Expr::Kind::Not: return "not " + print_expr(*e.kids[0]);
    case Expr::Kind::Cmp:
      return print_expr(*e.kids[0]) + " " + e.str + " " + print_expr(*e.kids[1]);
    case Expr::Kind::And:
    case Expr::Kind::Or: {
      std::string sep = e.kind == Expr::Kind::And ? " and " : " or ";
      std::string out;
      for (size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += sep;
        out += print_expr(*e.kids[i]);
      }
      return out;
    }
    case Expr::Kind::Call: {
      std::string out = e.str + "(";
      for (size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += ", ";
        out += print_expr(*e.kids[i]);
      }
      return out + ")";
    }
  }
  return "";
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.path != b.path || a.str != b.str ||
      a.num != b.num || a.boolean != b.boolean ||
      a.kids.size() != b.kids.size())
    return false;
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (!equal(*a.kids[i], *b.kids[i])) return false;
  return true;
}

namespace {

Value path_value(const doc::Path& p, const doc::CanonicalDoc& d) {
  doc::PathValue v = doc::lookup(d, p);
  switch (v.tag) {
    case doc::PathValue::Tag::MISSING:
      return Value::error("missing path " + p.str());
    case doc::PathValue::Tag::SCALAR:
      return Value::string(v.scalar);
    case doc::PathValue::Tag::ELEMENT:
      if (v.element->text) return Value::string(*v.element->text);
      return Value::error("element " + p.str() + " has no text");
  }
  return Value::error("unreachable");
}

Value to_number(const Value& v) {
  if (v.tag == Value::Tag::NUM) return v;
  if (v.tag == Value::Tag::STR) {
    if (auto n = doc::coerce_number(v.str)) return Value::number(*n);
    return Value::error("not a number: \"" + v.str + "\"");
  }
  return Value::error("cannot coerce to number");
}

std::string to_text(const Value& v) {
  switch (v.tag) {
    case Value::Tag::STR: return v.str;
    case Value::Tag::NUM: return doc::format_number(v.num);
    case Value::Tag::BOOL: return v.boolean ? "true" : "false";
    case Value::Tag::ERROR: return "";
  }
  return "";
}

Value compare(const std::string& op, const Value& a, const Value& b) {
  bool eq_op = op == "==" || op == "!=";
  if (eq_op) {
    bool eq;
    if (a.tag == b.tag) {
      eq = a == b;
    } else if ((a.tag == Value::Tag::NUM && b.tag == Value::Tag::STR) ||
               (a.tag == Value::Tag::STR && b.tag == Value::Tag::NUM)) {
      Value na = to_number(a), nb = to_number(b);
      if (na.is_error()) return na;
      if (nb.is_error()) return nb;
      eq = na.num == nb.num;
    } else {
      return Value::error("comparison between unlike types");
    }
    return Value::boolean_(op == "==" ? eq : !eq);
  }
  Value na = to_number(a), nb = to_number(b);
  if (na.is_error()) return na;
  if (nb.is_error()) return nb;
  bool r;
  if (op == "<") r = na.num < nb.num;
  else if (op == "<=") r = na.num <= nb.num;
  else if (op == ">") r = na.num > nb.num;
  else r = na.num >= nb.num;
  return Value::boolean_(r);
}

}  // namespace

Value eval_expr(const Expr& e, const doc::CanonicalDoc& d) {
  switch (e.kind) {
    case Expr::Kind::Path: return path_value(e.path, d);
    case Expr::Kind::StrLit: return Value::string(e.str);
    case Expr::Kind::NumLit: return Value::number(e.num);
    case Expr::Kind::BoolLit: return Value::boolean_(e.boolean);
    case Expr::Kind::Not: {
      Value v = eval_expr(*e.kids[0], d);
      if (v.is_error()) return v;
      if (v.tag != Value::Tag::BOOL) return Value::error("not on non-boolean");
      return Value::boolean_(!v.boolean);
    }
    case Expr::Kind::And:
    case Expr::Kind::Or: {
      // strict evaluation: errors propagate from any operand
      bool acc = e.kind == Expr::Kind::And;
      for (const ExprPtr& k : e.kids) {
        Value v = eval_expr(*k, d);
        if (v.is_error()) return v;
        if (v.tag != Value::Tag::BOOL)
          return Value::error("boolean operator on non-boolean");
        if (e.kind == Expr::Kind::And) acc = acc && v.boolean;
        else acc = acc || v.boolean;
      }
      return Value::boolean_(acc);
    }
    case Expr::Kind::Cmp: {
      Value a = eval_expr(*e.kids[0], d);
      if (a.is_error()) return a;
      Value b = eval_expr(*e.kids[1], d);
      if (b.is_error()) return b;
      return compare(e.str, a, b);
    }
    case Expr::Kind::Call: {
      if (e.str == "exists") {
        doc::PathValue v = doc::lookup(d, e.kids[0]->path);
        return Value::boolean_(v.tag != doc::PathValue::Tag::MISSING);
      }
      std::vector<Value> args;
      for (const ExprPtr& k : e.kids) {
        args.push_back(eval_expr(*k, d));
        if (args.back().is_error()) return args.back();
      }
      if (e.str == "num") return to_number(args[0]);
      if (e.str == "str") return Value::string(to_text(args[0]));
      // concat
      std::string out;
      for (const Value& v : args) out += to_text(v);
      return Value::string(out);
    }
  }
  return Value::error("unreachable");
}

std::string value_repr(const Value& v) {
  switch (v.tag) {
    case Value::Tag::STR: return quote(v.str);
    case Value::Tag::NUM: return doc::format_number(v.num);
    case Value::Tag::BOOL: return v.boolean ? "true" : "false";
    case Value::Tag::ERROR: return "ERROR(" + v.str + ")";
  }
  return "?";
}

}  // namespace ddsflow::expr
