#include "psvf/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

namespace psvf {

struct Expr::Node {
  Kind kind;
  double value = 0.0;
  Variable var = Variable::X;
  std::string name;
  BinaryOp op = BinaryOp::Add;
  Function fn = Function::Sin;
  std::vector<Expr> children;
};

Expr::Expr() : Expr(literal(0.0)) {}

Expr Expr::literal(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Literal;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(Variable v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->var = v;
  return Expr(std::move(n));
}

Expr Expr::parameter(std::string name) {
  if (name == "x" || name == "y" || name == "z") {
    throw PreconditionError("parameter name '" + name +
                            "' collides with a phase-space variable");
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Parameter;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Negate;
  n->children.push_back(std::move(operand));
  return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->op = op;
  n->children.push_back(std::move(lhs));
  n->children.push_back(std::move(rhs));
  return Expr(std::move(n));
}

Expr Expr::call(Function fn, Expr argument) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->fn = fn;
  n->children.push_back(std::move(argument));
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
Variable Expr::var() const { return node_->var; }
const std::string& Expr::name() const { return node_->name; }
BinaryOp Expr::op() const { return node_->op; }
Function Expr::function() const { return node_->fn; }

const Expr& Expr::operand() const { return node_->children[0]; }
const Expr& Expr::lhs() const { return node_->children[0]; }
const Expr& Expr::rhs() const { return node_->children[1]; }

bool Expr::is_literal(double v) const {
  return node_->kind == Kind::Literal && node_->value == v;
}

bool operator==(const Expr& a, const Expr& b) {
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (a.node_ == b.node_) return true;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Expr::Kind::Literal:
      return x.value == y.value;
    case Expr::Kind::Variable:
      return x.var == y.var;
    case Expr::Kind::Parameter:
      return x.name == y.name;
    case Expr::Kind::Negate:
      return a.operand() == b.operand();
    case Expr::Kind::Binary:
      return x.op == y.op && a.lhs() == b.lhs() && a.rhs() == b.rhs();
    case Expr::Kind::Call:
      return x.fn == y.fn && a.operand() == b.operand();
  }
  return false;
}

std::string_view to_string(Function fn) {
  switch (fn) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Exp: return "exp";
    case Function::Sqrt: return "sqrt";
    case Function::Log: return "log";
  }
  return "?";
}

std::string_view to_string(Variable v) {
  switch (v) {
    case Variable::X: return "x";
    case Variable::Y: return "y";
    case Variable::Z: return "z";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parser

namespace {

bool lookup_function(std::string_view name, Function& fn) {
  static constexpr std::pair<std::string_view, Function> table[] = {
      {"sin", Function::Sin},   {"cos", Function::Cos}, {"exp", Function::Exp},
      {"sqrt", Function::Sqrt}, {"log", Function::Log},
  };
  for (const auto& [n, f] : table) {
    if (n == name) {
      fn = f;
      return true;
    }
  }
  return false;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(std::string expected) const {
    throw SyntaxError(pos_, std::move(expected));
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(BinaryOp::Add, lhs, term());
      } else if (accept('-')) {
        lhs = Expr::binary(BinaryOp::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(BinaryOp::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = Expr::binary(BinaryOp::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::negate(unary());
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::binary(BinaryOp::Pow, base, unary());
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("number, identifier or '('");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = expr();
      if (!accept(')')) fail("')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return identifier();
    }
    fail("number, identifier or '('");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) {
      pos_ = start;
      fail("digit");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        ++pos_;
      }
      if (digits() == 0) fail("exponent digits");
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      pos_ = start;
      fail("finite number");
    }
    return Expr::literal(value);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    const std::size_t after = pos_;
    skip_ws();
    const bool is_call = pos_ < text_.size() && text_[pos_] == '(';
    Function fn{};
    const bool known = lookup_function(name, fn);
    if (is_call) {
      if (!known) {
        pos_ = start;
        fail("known function (sin, cos, exp, sqrt, log)");
      }
      ++pos_;
      Expr arg = expr();
      if (!accept(')')) fail("')'");
      return Expr::call(fn, arg);
    }
    if (known) fail("'(' after function name");
    pos_ = after;
    if (name == "x") return Expr::variable(Variable::X);
    if (name == "y") return Expr::variable(Variable::Y);
    if (name == "z") return Expr::variable(Variable::Z);
    return Expr::parameter(std::string(name));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double checked(double v, const char* what) {
  if (std::isnan(v)) throw DomainError(std::string(what) + " is undefined");
  return v;
}

}  // namespace

double eval_expr(const Expr& e, const Point3& p, const ParamMap& params) {
  switch (e.kind()) {
    case Expr::Kind::Literal:
      return e.value();
    case Expr::Kind::Variable:
      switch (e.var()) {
        case Variable::X: return p.x;
        case Variable::Y: return p.y;
        case Variable::Z: return p.z;
      }
      break;
    case Expr::Kind::Parameter: {
      auto it = params.find(e.name());
      if (it == params.end()) throw UnboundParameter(e.name());
      return it->second;
    }
    case Expr::Kind::Negate:
      return -eval_expr(e.operand(), p, params);
    case Expr::Kind::Binary: {
      const double l = eval_expr(e.lhs(), p, params);
      const double r = eval_expr(e.rhs(), p, params);
      switch (e.op()) {
        case BinaryOp::Add: return checked(l + r, "sum");
        case BinaryOp::Sub: return checked(l - r, "difference");
        case BinaryOp::Mul: return checked(l * r, "product");
        case BinaryOp::Div:
          if (r == 0.0) throw DomainError("division by zero");
          return checked(l / r, "quotient");
        case BinaryOp::Pow:
          return checked(std::pow(l, r), "power");
      }
      break;
    }
    case Expr::Kind::Call: {
      const double v = eval_expr(e.operand(), p, params);
      switch (e.function()) {
        case Function::Sin: return checked(std::sin(v), "sin");
        case Function::Cos: return checked(std::cos(v), "cos");
        case Function::Exp: return std::exp(v);
        case Function::Sqrt:
          if (v < 0.0) throw DomainError("sqrt of a negative number");
          return std::sqrt(v);
        case Function::Log:
          if (v <= 0.0) throw DomainError("log of a non-positive number");
          return std::log(v);
      }
      break;
    }
  }
  throw DomainError("malformed expression");
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

const Expr& zero() {
  static const Expr z = Expr::literal(0.0);
  return z;
}
const Expr& one() {
  static const Expr o = Expr::literal(1.0);
  return o;
}

Expr neg(const Expr& a) {
  if (a.is_literal(0.0)) return zero();
  return Expr::negate(a);
}
Expr add(const Expr& a, const Expr& b) {
  if (a.is_literal(0.0)) return b;
  if (b.is_literal(0.0)) return a;
  return Expr::binary(BinaryOp::Add, a, b);
}
Expr sub(const Expr& a, const Expr& b) {
  if (b.is_literal(0.0)) return a;
  if (a.is_literal(0.0)) return neg(b);
  return Expr::binary(BinaryOp::Sub, a, b);
}
Expr mul(const Expr& a, const Expr& b) {
  if (a.is_literal(0.0) || b.is_literal(0.0)) return zero();
  if (a.is_literal(1.0)) return b;
  if (b.is_literal(1.0)) return a;
  return Expr::binary(BinaryOp::Mul, a, b);
}
Expr div(const Expr& a, const Expr& b) {
  if (a.is_literal(0.0)) return zero();
  if (b.is_literal(1.0)) return a;
  return Expr::binary(BinaryOp::Div, a, b);
}
Expr pow(const Expr& a, const Expr& b) {
  if (b.is_literal(0.0)) return one();
  if (b.is_literal(1.0)) return a;
  return Expr::binary(BinaryOp::Pow, a, b);
}

bool depends_on_variables(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Literal:
    case Expr::Kind::Parameter:
      return false;
    case Expr::Kind::Variable:
      return true;
    case Expr::Kind::Negate:
    case Expr::Kind::Call:
      return depends_on_variables(e.operand());
    case Expr::Kind::Binary:
      return depends_on_variables(e.lhs()) || depends_on_variables(e.rhs());
  }
  return true;
}

}  // namespace

Expr diff_expr(const Expr& e, Variable wrt) {
  switch (e.kind()) {
    case Expr::Kind::Literal:
    case Expr::Kind::Parameter:
      return zero();
    case Expr::Kind::Variable:
      return e.var() == wrt ? one() : zero();
    case Expr::Kind::Negate:
      return neg(diff_expr(e.operand(), wrt));
    case Expr::Kind::Binary: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      const Expr du = diff_expr(u, wrt);
      const Expr dv = diff_expr(v, wrt);
      switch (e.op()) {
        case BinaryOp::Add: return add(du, dv);
        case BinaryOp::Sub: return sub(du, dv);
        case BinaryOp::Mul: return add(mul(du, v), mul(u, dv));
        case BinaryOp::Div:
          return div(sub(mul(du, v), mul(u, dv)), pow(v, Expr::literal(2.0)));
        case BinaryOp::Pow: {
          if (!depends_on_variables(v)) {
            const Expr reduced = v.kind() == Expr::Kind::Literal
                                     ? Expr::literal(v.value() - 1.0)
                                     : sub(v, one());
            return mul(mul(v, pow(u, reduced)), du);
          }
          const Expr log_u = Expr::call(Function::Log, u);
          if (!depends_on_variables(u)) return mul(mul(e, log_u), dv);
          return mul(e, add(mul(dv, log_u), div(mul(v, du), u)));
        }
      }
      break;
    }
    case Expr::Kind::Call: {
      const Expr& u = e.operand();
      const Expr du = diff_expr(u, wrt);
      switch (e.function()) {
        case Function::Sin: return mul(Expr::call(Function::Cos, u), du);
        case Function::Cos: return neg(mul(Expr::call(Function::Sin, u), du));
        case Function::Exp: return mul(e, du);
        case Function::Sqrt:
          return div(du, mul(Expr::literal(2.0), e));
        case Function::Log: return div(du, u);
      }
      break;
    }
  }
  return zero();
}

Expr bind_parameters(const Expr& e, const ParamMap& params) {
  switch (e.kind()) {
    case Expr::Kind::Literal:
    case Expr::Kind::Variable:
      return e;
    case Expr::Kind::Parameter: {
      auto it = params.find(e.name());
      if (it == params.end()) throw UnboundParameter(e.name());
      return Expr::literal(it->second);
    }
    case Expr::Kind::Negate:
      return Expr::negate(bind_parameters(e.operand(), params));
    case Expr::Kind::Binary:
      return Expr::binary(e.op(), bind_parameters(e.lhs(), params),
                          bind_parameters(e.rhs(), params));
    case Expr::Kind::Call:
      return Expr::call(e.function(), bind_parameters(e.operand(), params));
  }
  return e;
}

void collect_parameters(const Expr& e, std::set<std::string>& out) {
  switch (e.kind()) {
    case Expr::Kind::Literal:
    case Expr::Kind::Variable:
      return;
    case Expr::Kind::Parameter:
      out.insert(e.name());
      return;
    case Expr::Kind::Negate:
    case Expr::Kind::Call:
      collect_parameters(e.operand(), out);
      return;
    case Expr::Kind::Binary:
      collect_parameters(e.lhs(), out);
      collect_parameters(e.rhs(), out);
      return;
  }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Binding strength used by the printer; higher binds tighter.
int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Literal:
      return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
    case Expr::Kind::Variable:
    case Expr::Kind::Parameter:
    case Expr::Kind::Call:
      return 5;
    case Expr::Kind::Negate:
      return 3;
    case Expr::Kind::Binary:
      switch (e.op()) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
  }
  return 5;
}

std::string format_literal(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& e, bool parens, std::string& out) {
  if (parens) out += '(';
  print(e, out);
  if (parens) out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case Expr::Kind::Literal:
      out += format_literal(e.value());
      return;
    case Expr::Kind::Variable:
      out += to_string(e.var());
      return;
    case Expr::Kind::Parameter:
      out += e.name();
      return;
    case Expr::Kind::Negate:
      out += '-';
      print_child(e.operand(), precedence(e.operand()) <= 3, out);
      return;
    case Expr::Kind::Call:
      out += to_string(e.function());
      out += '(';
      print(e.operand(), out);
      out += ')';
      return;
    case Expr::Kind::Binary: {
      const int level = precedence(e);
      const int pl = precedence(e.lhs());
      const int pr = precedence(e.rhs());
      if (e.op() == BinaryOp::Pow) {
        print_child(e.lhs(), pl <= 4, out);
        out += '^';
        print_child(e.rhs(), pr < 4, out);
        return;
      }
      print_child(e.lhs(), pl < level, out);
      switch (e.op()) {
        case BinaryOp::Add: out += " + "; break;
        case BinaryOp::Sub: out += " - "; break;
        case BinaryOp::Mul: out += '*'; break;
        case BinaryOp::Div: out += '/'; break;
        case BinaryOp::Pow: break;
      }
      print_child(e.rhs(), pr <= level || pr == 3, out);
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

}  // namespace psvf
