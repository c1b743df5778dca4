#include "clairaut/expression.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace clairaut::expr {

namespace {

Expr make(Kind k, double v, int idx, Expr a, Expr b) {
  return std::make_shared<Node>(k, v, idx, std::move(a), std::move(b));
}

bool is_const(const Expr& e) { return e->kind == Kind::Constant; }

// fold only finite results so every tree stays printable and re-parsable
bool foldable(double v) { return std::isfinite(v); }

}  // namespace

bool is_constant(const Expr& e, double v) { return is_const(e) && e->value == v; }

Expr constant(double v) { return make(Kind::Constant, v, -1, nullptr, nullptr); }

Expr variable(int index) { return make(Kind::Variable, 0.0, index, nullptr, nullptr); }

Expr neg(Expr x) {
  if (is_const(x)) return constant(-x->value);
  if (x->kind == Kind::Neg) return x->a;
  return make(Kind::Neg, 0, -1, std::move(x), nullptr);
}

Expr add(Expr x, Expr y) {
  if (is_const(x) && is_const(y) && foldable(x->value + y->value))
    return constant(x->value + y->value);
  if (is_constant(x, 0.0)) return y;
  if (is_constant(y, 0.0)) return x;
  return make(Kind::Add, 0, -1, std::move(x), std::move(y));
}

Expr sub(Expr x, Expr y) {
  if (is_const(x) && is_const(y) && foldable(x->value - y->value))
    return constant(x->value - y->value);
  if (is_constant(y, 0.0)) return x;
  if (is_constant(x, 0.0)) return neg(std::move(y));
  return make(Kind::Sub, 0, -1, std::move(x), std::move(y));
}

Expr mul(Expr x, Expr y) {
  if (is_const(x) && is_const(y) && foldable(x->value * y->value))
    return constant(x->value * y->value);
  if (is_constant(x, 0.0) || is_constant(y, 0.0)) return constant(0.0);
  if (is_constant(x, 1.0)) return y;
  if (is_constant(y, 1.0)) return x;
  return make(Kind::Mul, 0, -1, std::move(x), std::move(y));
}

Expr div(Expr x, Expr y) {
  if (is_const(x) && is_const(y) && y->value != 0.0 && foldable(x->value / y->value))
    return constant(x->value / y->value);
  if (is_constant(x, 0.0)) return constant(0.0);
  if (is_constant(y, 1.0)) return x;
  return make(Kind::Div, 0, -1, std::move(x), std::move(y));
}

Expr pow(Expr x, Expr y) {
  if (is_constant(y, 1.0)) return x;
  if (is_constant(y, 0.0)) return constant(1.0);
  if (is_const(x) && is_const(y) && foldable(std::pow(x->value, y->value)))
    return constant(std::pow(x->value, y->value));
  return make(Kind::Pow, 0, -1, std::move(x), std::move(y));
}

Expr exp(Expr x) {
  if (is_const(x) && foldable(std::exp(x->value))) return constant(std::exp(x->value));
  return make(Kind::Exp, 0, -1, std::move(x), nullptr);
}

Expr log(Expr x) {
  if (is_const(x) && foldable(std::log(x->value))) return constant(std::log(x->value));
  return make(Kind::Log, 0, -1, std::move(x), nullptr);
}

Expr sin(Expr x) {
  if (is_const(x)) return constant(std::sin(x->value));
  return make(Kind::Sin, 0, -1, std::move(x), nullptr);
}

Expr cos(Expr x) {
  if (is_const(x)) return constant(std::cos(x->value));
  return make(Kind::Cos, 0, -1, std::move(x), nullptr);
}

Expr sqrt(Expr x) {
  if (is_const(x) && foldable(std::sqrt(x->value))) return constant(std::sqrt(x->value));
  return make(Kind::Sqrt, 0, -1, std::move(x), nullptr);
}

double eval(const Expr& e, const Vec& x) {
  switch (e->kind) {
    case Kind::Constant: return e->value;
    case Kind::Variable:
      if (e->var < 0 || e->var >= x.size())
        throw EvaluationError("variable x" + std::to_string(e->var + 1) + " out of range");
      return x[e->var];
    case Kind::Neg: return -eval(e->a, x);
    case Kind::Add: return eval(e->a, x) + eval(e->b, x);
    case Kind::Sub: return eval(e->a, x) - eval(e->b, x);
    case Kind::Mul: return eval(e->a, x) * eval(e->b, x);
    case Kind::Div: return eval(e->a, x) / eval(e->b, x);
    case Kind::Pow: return std::pow(eval(e->a, x), eval(e->b, x));
    case Kind::Exp: return std::exp(eval(e->a, x));
    case Kind::Log: return std::log(eval(e->a, x));
    case Kind::Sin: return std::sin(eval(e->a, x));
    case Kind::Cos: return std::cos(eval(e->a, x));
    case Kind::Sqrt: return std::sqrt(eval(e->a, x));
  }
  throw EvaluationError("corrupt expression node");
}

Expr differentiate(const Expr& e, int var) {
  switch (e->kind) {
    case Kind::Constant: return constant(0.0);
    case Kind::Variable: return constant(e->var == var ? 1.0 : 0.0);
    case Kind::Neg: return neg(differentiate(e->a, var));
    case Kind::Add: return add(differentiate(e->a, var), differentiate(e->b, var));
    case Kind::Sub: return sub(differentiate(e->a, var), differentiate(e->b, var));
    case Kind::Mul:
      return add(mul(differentiate(e->a, var), e->b), mul(e->a, differentiate(e->b, var)));
    case Kind::Div:
      // (a/b)' = a'/b - a b' / b^2
      return sub(div(differentiate(e->a, var), e->b),
                 div(mul(e->a, differentiate(e->b, var)), mul(e->b, e->b)));
    case Kind::Pow: {
      Expr da = differentiate(e->a, var);
      Expr dbv = differentiate(e->b, var);
      if (is_constant(dbv, 0.0)) {
        // a^c: c a^(c-1) a'
        return mul(mul(e->b, pow(e->a, sub(e->b, constant(1.0)))), da);
      }
      // a^b = exp(b log a): a^b (b' log a + b a'/a)
      return mul(pow(e->a, e->b), add(mul(dbv, log(e->a)), div(mul(e->b, da), e->a)));
    }
    case Kind::Exp: return mul(exp(e->a), differentiate(e->a, var));
    case Kind::Log: return div(differentiate(e->a, var), e->a);
    case Kind::Sin: return mul(cos(e->a), differentiate(e->a, var));
    case Kind::Cos: return neg(mul(sin(e->a), differentiate(e->a, var)));
    case Kind::Sqrt: return div(differentiate(e->a, var), mul(constant(2.0), sqrt(e->a)));
  }
  throw EvaluationError("corrupt expression node");
}

namespace {

int precedence(Kind k) {
  switch (k) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Neg: return 3;
    case Kind::Pow: return 4;
    default: return 5;
  }
}

void print(std::ostringstream& out, const Expr& e, int parent_prec, bool right_side) {
  int prec = precedence(e->kind);
  bool parens = prec < parent_prec || (prec == parent_prec && right_side && prec != 4);
  switch (e->kind) {
    case Kind::Constant: {
      if (e->value < 0) {
        out << "(";
        out.precision(17);
        out << e->value << ")";
      } else {
        out.precision(17);
        out << e->value;
      }
      return;
    }
    case Kind::Variable: out << "x" << (e->var + 1); return;
    case Kind::Neg:
      if (parens) out << "(";
      out << "-";
      print(out, e->a, prec + 1, false);
      if (parens) out << ")";
      return;
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Div:
    case Kind::Pow: {
      const char* op = e->kind == Kind::Add   ? " + "
                       : e->kind == Kind::Sub ? " - "
                       : e->kind == Kind::Mul ? "*"
                       : e->kind == Kind::Div ? "/"
                                              : "^";
      if (parens) out << "(";
      // ^ is right-associative; the others are left-associative
      bool ra = e->kind == Kind::Pow;
      print(out, e->a, ra ? prec + 1 : prec, false);
      out << op;
      print(out, e->b, ra ? prec : prec + 1, true);
      if (parens) out << ")";
      return;
    }
    case Kind::Exp:
    case Kind::Log:
    case Kind::Sin:
    case Kind::Cos:
    case Kind::Sqrt: {
      const char* fn = e->kind == Kind::Exp   ? "exp"
                       : e->kind == Kind::Log ? "log"
                       : e->kind == Kind::Sin ? "sin"
                       : e->kind == Kind::Cos ? "cos"
                                              : "sqrt";
      out << fn << "(";
      print(out, e->a, 0, false);
      out << ")";
      return;
    }
  }
}

// Recursive-descent parser.
struct Parser {
  const std::string& src;
  std::size_t pos = 0;
  int num_vars;

  explicit Parser(const std::string& s, int nv) : src(s), num_vars(nv) {}

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool peek(char c) {
    skip_ws();
    return pos < src.size() && src[pos] == c;
  }

  bool accept(char c) {
    if (peek(c)) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& expected) {
    skip_ws();
    std::ostringstream msg;
    msg << "syntax error at offset " << pos << ": expected " << expected;
    if (pos < src.size())
      msg << ", found '" << src[pos] << "'";
    else
      msg << ", found end of input";
    throw ParseError(msg.str(), pos);
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+'))
        lhs = add(lhs, parse_term());
      else if (accept('-'))
        lhs = sub(lhs, parse_term());
      else
        return lhs;
    }
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    for (;;) {
      if (accept('*'))
        lhs = mul(lhs, parse_factor());
      else if (accept('/'))
        lhs = div(lhs, parse_factor());
      else
        return lhs;
    }
  }

  Expr parse_factor() {
    if (accept('-')) return neg(parse_factor());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) return pow(base, parse_factor());
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos >= src.size()) fail("number, identifier or '('");
    char c = src[pos];
    if (c == '(') {
      ++pos;
      Expr e = parse_expr();
      if (!accept(')')) fail("')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail("number, identifier or '('");
  }

  Expr parse_number() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.'))
      ++pos;
    if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
      std::size_t mark = pos;
      ++pos;
      if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
      if (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
      } else {
        pos = mark;  // 'e' belongs to something else
      }
    }
    try {
      return constant(std::stod(src.substr(start, pos - start)));
    } catch (const std::exception&) {
      pos = start;
      fail("numeric literal");
    }
  }

  Expr parse_ident() {
    std::size_t start = pos;
    while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string name = src.substr(start, pos - start);
    if (name == "exp" || name == "log" || name == "sin" || name == "cos" || name == "sqrt") {
      if (!accept('(')) fail("'(' after function name '" + name + "'");
      Expr arg = parse_expr();
      if (!accept(')')) fail("')'");
      if (name == "exp") return exp(arg);
      if (name == "log") return log(arg);
      if (name == "sin") return sin(arg);
      if (name == "cos") return cos(arg);
      return sqrt(arg);
    }
    if (name == "pi") return constant(3.14159265358979323846);
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        int idx = std::stoi(name.substr(1));
        if (idx < 1 || idx > num_vars) {
          pos = start;
          throw ParseError("unknown identifier '" + name + "' at offset " + std::to_string(start) +
                               ": only x1..x" + std::to_string(num_vars) + " are declared",
                           start);
        }
        return variable(idx - 1);
      }
    }
    pos = start;
    throw ParseError("unknown identifier '" + name + "' at offset " + std::to_string(start), start);
  }
};

}  // namespace

Expr parse(const std::string& src, int num_vars) {
  Parser p(src, num_vars);
  p.skip_ws();
  if (p.pos >= src.size()) throw ParseError("empty expression", 0);
  Expr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != src.size()) p.fail("operator or end of input");
  return e;
}

std::string to_string(const Expr& e) {
  std::ostringstream out;
  print(out, e, 0, false);
  return out.str();
}

bool depends_on_nothing(const Expr& e) {
  if (e->kind == Kind::Variable) return false;
  if (e->a && !depends_on_nothing(e->a)) return false;
  if (e->b && !depends_on_nothing(e->b)) return false;
  return true;
}

Expr shift_variables(const Expr& e, int offset) {
  if (e->kind == Kind::Variable) return variable(e->var + offset);
  if (!e->a) return e;
  Expr a = shift_variables(e->a, offset);
  Expr b = e->b ? shift_variables(e->b, offset) : nullptr;
  return std::make_shared<Node>(e->kind, e->value, e->var, std::move(a), std::move(b));
}

}  // namespace clairaut::expr
