#pragma once

#include "clairaut/types.hpp"

#include <memory>
#include <string>

namespace clairaut::expr {

enum class Kind { Constant, Variable, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Sin, Cos, Sqrt };

class Node;
using Expr = std::shared_ptr<const Node>;

/// Immutable arithmetic syntax tree over variables x1..xm.
class Node {
 public:
  Kind kind;
  double value = 0.0;  // Constant
  int var = -1;        // Variable (0-based; x1 -> 0)
  Expr a, b;           // children; b only for binary kinds

  Node(Kind k, double v, int idx, Expr lhs, Expr rhs)
      : kind(k), value(v), var(idx), a(std::move(lhs)), b(std::move(rhs)) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset) : Error(what), offset(offset) {}
  std::size_t offset;
};

// Constructors fold constants and drop algebraic no-ops so derivative trees stay small.
Expr constant(double v);
Expr variable(int index);
Expr neg(Expr x);
Expr add(Expr x, Expr y);
Expr sub(Expr x, Expr y);
Expr mul(Expr x, Expr y);
Expr div(Expr x, Expr y);
Expr pow(Expr x, Expr y);
Expr exp(Expr x);
Expr log(Expr x);
Expr sin(Expr x);
Expr cos(Expr x);
Expr sqrt(Expr x);

/// Parses `src` with precedence ^ > unary minus > * / > + -, left-assoc
/// binary + - * /, right-assoc ^. Variables are x1..x<num_vars>.
/// Throws ParseError carrying the byte offset and the expected-token set.
Expr parse(const std::string& src, int num_vars);

double eval(const Expr& e, const Vec& x);

/// Exact symbolic partial derivative with respect to variable `var`.
Expr differentiate(const Expr& e, int var);

/// Round-trippable text form (parse(to_string(e)) evaluates identically).
std::string to_string(const Expr& e);

bool is_constant(const Expr& e, double v);

/// True when no variable occurs in the tree.
bool depends_on_nothing(const Expr& e);

/// Renames every variable x_i to x_{i+offset} (for embedding factor-chart
/// expressions into a product chart).
Expr shift_variables(const Expr& e, int offset);

}  // namespace clairaut::expr
