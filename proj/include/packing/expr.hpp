#pragma once

#include <memory>
#include <set>
#include <span>
#include <vector>

namespace packing {

enum class ExprOp { constant, variable, add, sub, mul, neg, powi, sin, cos };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

/// Immutable expression DAG over the operator set +, -, *, integer power,
/// sin, cos. Constants fold at construction.
struct ExprNode {
  ExprOp op = ExprOp::constant;
  double value = 0;   // constant
  int var = -1;       // variable
  int exponent = 0;   // powi
  Expr a, b;
};

Expr constant(double v);
Expr variable(int index);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
inline Expr operator+(const Expr& a, double b) { return a + constant(b); }
inline Expr operator+(double a, const Expr& b) { return constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - constant(b); }
inline Expr operator-(double a, const Expr& b) { return constant(a) - b; }
inline Expr operator*(const Expr& a, double b) { return a * constant(b); }
inline Expr operator*(double a, const Expr& b) { return constant(a) * b; }

Expr powi(const Expr& a, int exponent);  // exponent >= 0
Expr sin_e(const Expr& a);
Expr cos_e(const Expr& a);
inline Expr sq(const Expr& a) { return powi(a, 2); }

double eval_expr(const Expr& e, std::span<const double> x);
Expr diff(const Expr& e, int var);
void collect_vars(const Expr& e, std::set<int>& out);

/// Flat postfix program compiled from an expression; evaluation uses a
/// caller-provided stack so it is reentrant.
struct Tape {
  struct Instr {
    ExprOp op;
    double value;
    int var;
    int exponent;
  };
  std::vector<Instr> code;
  int stack_need = 0;

  double eval(std::span<const double> x, std::vector<double>& stack) const;
};

Tape compile(const Expr& e);

}  // namespace packing
