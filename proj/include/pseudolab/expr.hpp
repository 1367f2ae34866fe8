#pragma once

/// @file expr.hpp
/// @brief Complex-valued expressions in one real variable `x`.
///
/// Grammar (whitespace insensitive):
///
///     expr   := term (('+'|'-') term)*
///     term   := factor (('*'|'/') factor)*
///     factor := unary ('^' factor)?          right associative
///     unary  := '-' unary | atom
///     atom   := number | 'x' | 'i' | 'pi' | ident '(' expr ')' | '(' expr ')'
///
/// `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. Recognised
/// functions: exp, sin, cos, sqrt, abs, re, im.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pseudolab/types.hpp"

namespace pseudolab {

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

class EvalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class NodeKind { Constant, Variable, ImagUnit, Negate, Add, Sub, Mul, Div, Pow, Call };

enum class Function { Exp, Sin, Cos, Sqrt, Abs, Re, Im };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;          // Constant only
  Function function = Function::Exp;  // Call only
  std::vector<ExprPtr> children;
};

/// Immutable expression tree.
class Expr {
public:
  Expr() = default;
  explicit Expr(ExprPtr root) : root_(std::move(root)) {}

  /// Throws EvalError on division by zero or a non-finite result.
  Complex evaluate(double x) const;
  /// Canonical, fully parenthesised text; parse(print()) reproduces the tree.
  std::string print() const;
  const ExprNode& root() const { return *root_; }
  bool empty() const { return !root_; }

  static ExprPtr constant(double v);
  static ExprPtr variable();
  static ExprPtr imag_unit();
  static ExprPtr negate(ExprPtr a);
  static ExprPtr binary(NodeKind kind, ExprPtr a, ExprPtr b);
  static ExprPtr call(Function f, ExprPtr a);

private:
  ExprPtr root_;
};

Expr parse_expression(std::string_view src);

bool structurally_equal(const ExprNode& a, const ExprNode& b);

}  // namespace pseudolab
