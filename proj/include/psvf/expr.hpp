#pragma once

// Arithmetic expressions over the phase-space variables x, y, z and named
// parameters: parsing, evaluation, symbolic differentiation, printing.
//
// Grammar (no implicit multiplication):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | ident | ident '(' expr ')' | '(' expr ')'

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "psvf/types.hpp"

namespace psvf {

using ParamMap = std::map<std::string, double, std::less<>>;

enum class Variable { X, Y, Z };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Sin, Cos, Exp, Sqrt, Log };

/// Immutable expression tree. Copies share nodes.
class Expr {
 public:
  enum class Kind { Literal, Variable, Parameter, Negate, Binary, Call };

  /// The literal 0.
  Expr();

  static Expr literal(double value);
  static Expr variable(Variable v);
  static Expr parameter(std::string name);
  static Expr negate(Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr call(Function fn, Expr argument);

  Kind kind() const;
  double value() const;                // Literal
  Variable var() const;                // Variable
  const std::string& name() const;     // Parameter
  BinaryOp op() const;                 // Binary
  Function function() const;           // Call
  const Expr& operand() const;         // Negate, Call
  const Expr& lhs() const;             // Binary
  const Expr& rhs() const;             // Binary

  bool is_literal(double v) const;

  /// Structural equality. Literals compare by value.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr parse_expression(std::string_view text);

/// Evaluates `e` at `p`. Throws UnboundParameter or DomainError.
double eval_expr(const Expr& e, const Point3& p, const ParamMap& params = {});

/// Partial derivative with 0/1 folding.
Expr diff_expr(const Expr& e, Variable wrt);

/// Replaces every parameter by its literal value. Throws UnboundParameter.
Expr bind_parameters(const Expr& e, const ParamMap& params);

void collect_parameters(const Expr& e, std::set<std::string>& out);

/// Prints with the minimum parentheses needed to re-parse to the same tree.
std::string to_string(const Expr& e);

std::string_view to_string(Function fn);
std::string_view to_string(Variable v);

}  // namespace psvf
