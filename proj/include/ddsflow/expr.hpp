#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ddsflow/doc.hpp"

namespace ddsflow::expr {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// AST shaped exactly like the surface grammar: And/Or are n-ary,
// Cmp is binary, parentheses exist only as function argument lists.
struct Expr {
  enum class Kind { Path, StrLit, NumLit, BoolLit, Cmp, And, Or, Not, Call };
  Kind kind;
  doc::Path path;           // Path
  std::string str;          // StrLit value, Cmp operator, Call name
  double num = 0;           // NumLit
  bool boolean = false;     // BoolLit
  std::vector<ExprPtr> kids;
};

bool equal(const Expr& a, const Expr& b);

// Evaluation result. Errors are values, never exceptions.
struct Value {
  enum class Tag { STR, NUM, BOOL, ERROR } tag = Tag::ERROR;
  std::string str;  // STR payload, or ERROR description
  double num = 0;
  bool boolean = false;

  static Value error(std::string why) { return {Tag::ERROR, std::move(why)}; }
  static Value string(std::string s) { return {Tag::STR, std::move(s)}; }
  static Value number(double v) { return {Tag::NUM, "", v}; }
  static Value boolean_(bool b) { return {Tag::BOOL, "", 0, b}; }
  bool is_error() const { return tag == Tag::ERROR; }
  bool is_true() const { return tag == Tag::BOOL && boolean; }
  bool operator==(const Value&) const = default;
};

ExprPtr parse_expr(const std::string& text);  // throws PARSE_ERROR
std::string print_expr(const Expr& e);
Value eval_expr(const Expr& e, const doc::CanonicalDoc& d);

inline Value eval_expr(const ExprPtr& e, const doc::CanonicalDoc& d) {
  return eval_expr(*e, d);
}

std::string value_repr(const Value& v);  // for transcripts/tests

}  // namespace ddsflow::expr
