#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "slbvp/errors.hpp"

namespace slbvp {

enum class Var { x, v };

inline const char* var_name(Var v) { return v == Var::x ? "x" : "v"; }

/// Which of the two expression variables a context admits.
struct VarSet {
  bool x = false;
  bool v = false;
  static constexpr VarSet xv() { return {true, true}; }
  static constexpr VarSet v_only() { return {false, true}; }
  static constexpr VarSet x_only() { return {true, false}; }
  static constexpr VarSet none() { return {false, false}; }
  constexpr bool allows(Var var) const { return var == Var::x ? x : v; }
};

struct EvalEnv {
  std::optional<double> x;
  std::optional<double> v;
  double get(Var var) const {
    const auto& slot = (var == Var::x) ? x : v;
    if (!slot) throw Error(std::string("unbound variable '") + var_name(var) + "'");
    return *slot;
  }
};

enum class UnaryOp { neg, sin, cos, exp, sqrt, abs };
enum class BinaryOp { add, sub, mul, div, pow };

/// Immutable expression tree for the user-declared scalar functions
/// f(x,v), g(v) and h(x). Nodes are shared; copies are cheap.
class Expr {
 public:
  enum class Kind { constant, variable, unary, binary };

  struct Node {
    Kind kind;
    double value = 0.0;               // constant
    Var var = Var::x;                 // variable
    UnaryOp uop = UnaryOp::neg;       // unary
    BinaryOp bop = BinaryOp::add;     // binary
    std::shared_ptr<const Node> a, b; // children (unary uses a)
  };

  Expr() : node_(constant(0.0).node_) {}

  static Expr constant(double c) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::constant;
    n->value = c;
    return Expr(std::move(n));
  }
  static Expr variable(Var v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::variable;
    n->var = v;
    return Expr(std::move(n));
  }
  static Expr unary(UnaryOp op, Expr child) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::unary;
    n->uop = op;
    n->a = std::move(child.node_);
    return Expr(std::move(n));
  }
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::binary;
    n->bop = op;
    n->a = std::move(lhs.node_);
    n->b = std::move(rhs.node_);
    return Expr(std::move(n));
  }

  const Node& node() const { return *node_; }
  Kind kind() const { return node_->kind; }
  bool is_constant(double c) const {
    return node_->kind == Kind::constant && node_->value == c;
  }
  std::optional<double> constant_value() const {
    if (node_->kind == Kind::constant) return node_->value;
    return std::nullopt;
  }

  static Expr wrap(std::shared_ptr<const Node> n) { return Expr(std::move(n)); }
  std::shared_ptr<const Node> share() const { return node_; }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// evaluation

inline double eval(const Expr& e, const EvalEnv& env) {
  const auto& n = e.node();
  switch (n.kind) {
    case Expr::Kind::constant:
      return n.value;
    case Expr::Kind::variable:
      return env.get(n.var);
    case Expr::Kind::unary: {
      double a = eval(Expr::wrap(n.a), env);
      switch (n.uop) {
        case UnaryOp::neg: return -a;
        case UnaryOp::sin: return std::sin(a);
        case UnaryOp::cos: return std::cos(a);
        case UnaryOp::exp: return std::exp(a);
        case UnaryOp::sqrt:
          if (a < 0.0) throw DomainError("sqrt of negative value");
          return std::sqrt(a);
        case UnaryOp::abs: return std::fabs(a);
      }
      break;
    }
    case Expr::Kind::binary: {
      double a = eval(Expr::wrap(n.a), env);
      double b = eval(Expr::wrap(n.b), env);
      switch (n.bop) {
        case BinaryOp::add: return a + b;
        case BinaryOp::sub: return a - b;
        case BinaryOp::mul: return a * b;
        case BinaryOp::div:
          if (b == 0.0) throw DomainError("division by zero");
          return a / b;
        case BinaryOp::pow: {
          if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power");
          double r = std::pow(a, b);
          if (std::isnan(r)) throw DomainError("power with negative base and non-integer exponent");
          return r;
        }
      }
      break;
    }
  }
  throw Error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// parsing

namespace detail {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  VarSet allowed;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c, const char* what) {
    if (!accept(c)) throw SyntaxError(std::string("expected ") + what, pos);
  }

  Expr parse() {
    Expr e = expression();
    if (!at_end()) throw SyntaxError("unexpected trailing input", pos);
    return e;
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+')) e = Expr::binary(BinaryOp::add, e, term());
      else if (accept('-')) e = Expr::binary(BinaryOp::sub, e, term());
      else return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) e = Expr::binary(BinaryOp::mul, e, unary());
      else if (accept('/')) e = Expr::binary(BinaryOp::div, e, unary());
      else return e;
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::unary(UnaryOp::neg, unary());
    return power();
  }

  // '^' binds tightest and is right-associative; the exponent may carry its
  // own unary minus, so 2^-3 reads as 2^(-3).
  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::binary(BinaryOp::pow, base, unary());
    return base;
  }

  Expr primary() {
    skip_ws();
    if (pos >= text.size()) throw SyntaxError("unexpected end of input", pos);
    char c = text[pos];
    if (c == '(') {
      ++pos;
      Expr e = expression();
      expect(')', "')'");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return identifier();
    throw SyntaxError(std::string("unexpected character '") + c + "'", pos);
  }

  Expr number() {
    double value = 0.0;
    const char* first = text.data() + pos;
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) throw SyntaxError("malformed number", pos);
    pos += static_cast<std::size_t>(ptr - first);
    return Expr::constant(value);
  }

  Expr identifier() {
    std::size_t start = pos;
    while (pos < text.size() &&
           ((text[pos] >= 'a' && text[pos] <= 'z') ||
            (text[pos] >= 'A' && text[pos] <= 'Z') ||
            (text[pos] >= '0' && text[pos] <= '9') || text[pos] == '_'))
      ++pos;
    std::string name(text.substr(start, pos - start));

    if (name == "pi") return Expr::constant(M_PI);
    if (name == "x" || name == "v") {
      Var var = (name == "x") ? Var::x : Var::v;
      if (!allowed.allows(var)) throw DisallowedVariable(name);
      return Expr::variable(var);
    }
    UnaryOp op;
    if (name == "sin") op = UnaryOp::sin;
    else if (name == "cos") op = UnaryOp::cos;
    else if (name == "exp") op = UnaryOp::exp;
    else if (name == "sqrt") op = UnaryOp::sqrt;
    else if (name == "abs") op = UnaryOp::abs;
    else throw UnknownIdentifier(name);

    expect('(', "'(' after function name");
    Expr arg = expression();
    expect(')', "')'");
    return Expr::unary(op, arg);
  }
};

}  // namespace detail

/// Parse an expression over the admitted variables. Arithmetic precedence:
/// ^ (right-associative) over unary minus over *,/ over +,-. The literal
/// `pi` and the functions sin, cos, exp, sqrt, abs are built in.
inline Expr parse(std::string_view text, VarSet allowed_vars) {
  if (text.empty()) throw SyntaxError("empty expression", 0);
  detail::Parser p{text, 0, allowed_vars};
  return p.parse();
}

// ---------------------------------------------------------------------------
// differentiation

namespace detail {

// Safe simplifications only: 0*e, 1*e, e+0, e-0 and constant folding.
// Folding is skipped when the fold itself would raise a domain error.
inline Expr fold_or(BinaryOp op, const Expr& a, const Expr& b) {
  if (a.kind() == Expr::Kind::constant && b.kind() == Expr::Kind::constant) {
    try {
      return Expr::constant(eval(Expr::binary(op, a, b), EvalEnv{}));
    } catch (const DomainError&) {
    }
  }
  switch (op) {
    case BinaryOp::add:
      if (a.is_constant(0.0)) return b;
      if (b.is_constant(0.0)) return a;
      break;
    case BinaryOp::sub:
      if (b.is_constant(0.0)) return a;
      break;
    case BinaryOp::mul:
      if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
      if (a.is_constant(1.0)) return b;
      if (b.is_constant(1.0)) return a;
      break;
    default:
      break;
  }
  return Expr::binary(op, a, b);
}

inline Expr fold_unary(UnaryOp op, const Expr& a) {
  if (a.kind() == Expr::Kind::constant) {
    try {
      return Expr::constant(eval(Expr::unary(op, a), EvalEnv{}));
    } catch (const DomainError&) {
    }
  }
  return Expr::unary(op, a);
}

}  // namespace detail

/// Symbolic partial derivative. Power nodes require a constant exponent.
inline Expr diff(const Expr& e, Var var) {
  using detail::fold_or;
  using detail::fold_unary;
  const auto& n = e.node();
  switch (n.kind) {
    case Expr::Kind::constant:
      return Expr::constant(0.0);
    case Expr::Kind::variable:
      return Expr::constant(n.var == var ? 1.0 : 0.0);
    case Expr::Kind::unary: {
      Expr a = Expr::wrap(n.a);
      Expr da = diff(a, var);
      switch (n.uop) {
        case UnaryOp::neg:
          return fold_unary(UnaryOp::neg, da);
        case UnaryOp::sin:
          return fold_or(BinaryOp::mul, fold_unary(UnaryOp::cos, a), da);
        case UnaryOp::cos:
          return fold_or(BinaryOp::mul,
                         fold_unary(UnaryOp::neg, fold_unary(UnaryOp::sin, a)), da);
        case UnaryOp::exp:
          return fold_or(BinaryOp::mul, fold_unary(UnaryOp::exp, a), da);
        case UnaryOp::sqrt:
          // u' / (2 sqrt(u))
          return fold_or(BinaryOp::div, da,
                         fold_or(BinaryOp::mul, Expr::constant(2.0),
                                 fold_unary(UnaryOp::sqrt, a)));
        case UnaryOp::abs:
          // (u/|u|) u'; undefined at u = 0, which eval reports as DomainError
          return fold_or(BinaryOp::mul,
                         fold_or(BinaryOp::div, a, fold_unary(UnaryOp::abs, a)), da);
      }
      break;
    }
    case Expr::Kind::binary: {
      Expr a = Expr::wrap(n.a);
      Expr b = Expr::wrap(n.b);
      switch (n.bop) {
        case BinaryOp::add:
          return fold_or(BinaryOp::add, diff(a, var), diff(b, var));
        case BinaryOp::sub:
          return fold_or(BinaryOp::sub, diff(a, var), diff(b, var));
        case BinaryOp::mul:
          return fold_or(BinaryOp::add, fold_or(BinaryOp::mul, diff(a, var), b),
                         fold_or(BinaryOp::mul, a, diff(b, var)));
        case BinaryOp::div:
          // (a'b - ab') / b^2
          return fold_or(
              BinaryOp::div,
              fold_or(BinaryOp::sub, fold_or(BinaryOp::mul, diff(a, var), b),
                      fold_or(BinaryOp::mul, a, diff(b, var))),
              fold_or(BinaryOp::mul, b, b));
        case BinaryOp::pow: {
          auto c = b.constant_value();
          if (!c) throw UnsupportedDerivative("cannot differentiate a power with a non-constant exponent");
          // c * a^(c-1) * a'
          Expr rule = fold_or(
              BinaryOp::mul, Expr::constant(*c),
              fold_or(BinaryOp::pow, a, Expr::constant(*c - 1.0)));
          return fold_or(BinaryOp::mul, rule, diff(a, var));
        }
      }
      break;
    }
  }
  throw Error("corrupt expression node");
}

/// Replace every occurrence of a variable by another expression.
inline Expr substitute(const Expr& e, Var var, const Expr& replacement) {
  const auto& n = e.node();
  switch (n.kind) {
    case Expr::Kind::constant:
      return e;
    case Expr::Kind::variable:
      return n.var == var ? replacement : e;
    case Expr::Kind::unary:
      return Expr::unary(n.uop, substitute(Expr::wrap(n.a), var, replacement));
    case Expr::Kind::binary:
      return Expr::binary(n.bop, substitute(Expr::wrap(n.a), var, replacement),
                          substitute(Expr::wrap(n.b), var, replacement));
  }
  throw Error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// printing

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::binary:
      switch (e.node().bop) {
        case BinaryOp::add:
        case BinaryOp::sub: return 1;
        case BinaryOp::mul:
        case BinaryOp::div: return 2;
        case BinaryOp::pow: return 4;
      }
      return 1;
    case Expr::Kind::unary:
      return e.node().uop == UnaryOp::neg ? 3 : 5;
    default:
      return 5;
  }
}

inline std::string format_constant(double c) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  return buf;
}

inline void print(const Expr& e, std::string& out) {
  auto child = [&](const Expr& sub, bool parens) {
    if (parens) out += '(';
    print(sub, out);
    if (parens) out += ')';
  };
  const auto& n = e.node();
  switch (n.kind) {
    case Expr::Kind::constant:
      if (n.value < 0.0) {
        out += '(';
        out += format_constant(n.value);
        out += ')';
      } else {
        out += format_constant(n.value);
      }
      return;
    case Expr::Kind::variable:
      out += var_name(n.var);
      return;
    case Expr::Kind::unary: {
      Expr a = Expr::wrap(n.a);
      if (n.uop == UnaryOp::neg) {
        out += '-';
        child(a, precedence(a) < 3);
        return;
      }
      switch (n.uop) {
        case UnaryOp::sin: out += "sin"; break;
        case UnaryOp::cos: out += "cos"; break;
        case UnaryOp::exp: out += "exp"; break;
        case UnaryOp::sqrt: out += "sqrt"; break;
        default: out += "abs"; break;
      }
      out += '(';
      print(a, out);
      out += ')';
      return;
    }
    case Expr::Kind::binary: {
      Expr a = Expr::wrap(n.a);
      Expr b = Expr::wrap(n.b);
      int p = precedence(e);
      const char* op = "+";
      bool left_parens = precedence(a) < p;
      bool right_parens = precedence(b) < p;
      switch (n.bop) {
        case BinaryOp::add: op = " + "; break;
        case BinaryOp::sub: op = " - "; right_parens = precedence(b) <= p; break;
        case BinaryOp::mul: op = "*"; break;
        case BinaryOp::div: op = "/"; right_parens = precedence(b) <= p; break;
        case BinaryOp::pow:
          op = "^";
          left_parens = precedence(a) <= p;   // pow is right-associative
          right_parens = precedence(b) < 3;   // exponent parses as a unary
          break;
      }
      child(a, left_parens);
      out += op;
      child(b, right_parens);
      return;
    }
  }
}

}  // namespace detail

/// Render the expression so that parsing the result is evaluation-equivalent.
inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print(e, out);
  return out;
}

}  // namespace slbvp
