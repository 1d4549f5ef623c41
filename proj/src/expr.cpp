#include "packing/expr.hpp"

#include <cmath>
#include <stdexcept>

namespace packing {

namespace {

bool is_const(const Expr& e, double v) { return e->op == ExprOp::constant && e->value == v; }

Expr node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

}  // namespace

Expr constant(double v) { return node({.op = ExprOp::constant, .value = v}); }

Expr variable(int index) { return node({.op = ExprOp::variable, .var = index}); }

Expr operator+(const Expr& a, const Expr& b) {
  if (a->op == ExprOp::constant && b->op == ExprOp::constant) return constant(a->value + b->value);
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  return node({.op = ExprOp::add, .a = a, .b = b});
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a->op == ExprOp::constant && b->op == ExprOp::constant) return constant(a->value - b->value);
  if (is_const(b, 0)) return a;
  if (is_const(a, 0)) return -b;
  return node({.op = ExprOp::sub, .a = a, .b = b});
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a->op == ExprOp::constant && b->op == ExprOp::constant) return constant(a->value * b->value);
  if (is_const(a, 0) || is_const(b, 0)) return constant(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  return node({.op = ExprOp::mul, .a = a, .b = b});
}

Expr operator-(const Expr& a) {
  if (a->op == ExprOp::constant) return constant(-a->value);
  if (a->op == ExprOp::neg) return a->a;
  return node({.op = ExprOp::neg, .a = a});
}

Expr powi(const Expr& a, int exponent) {
  if (exponent < 0) throw std::invalid_argument("powi exponent must be nonnegative");
  if (exponent == 0) return constant(1);
  if (exponent == 1) return a;
  if (a->op == ExprOp::constant) return constant(std::pow(a->value, exponent));
  return node({.op = ExprOp::powi, .exponent = exponent, .a = a});
}

Expr sin_e(const Expr& a) {
  if (a->op == ExprOp::constant) return constant(std::sin(a->value));
  return node({.op = ExprOp::sin, .a = a});
}

Expr cos_e(const Expr& a) {
  if (a->op == ExprOp::constant) return constant(std::cos(a->value));
  return node({.op = ExprOp::cos, .a = a});
}

double eval_expr(const Expr& e, std::span<const double> x) {
  switch (e->op) {
    case ExprOp::constant: return e->value;
    case ExprOp::variable: return x[e->var];
    case ExprOp::add: return eval_expr(e->a, x) + eval_expr(e->b, x);
    case ExprOp::sub: return eval_expr(e->a, x) - eval_expr(e->b, x);
    case ExprOp::mul: return eval_expr(e->a, x) * eval_expr(e->b, x);
    case ExprOp::neg: return -eval_expr(e->a, x);
    case ExprOp::powi: {
      double base = eval_expr(e->a, x), r = 1;
      for (int i = 0; i < e->exponent; ++i) r *= base;
      return r;
    }
    case ExprOp::sin: return std::sin(eval_expr(e->a, x));
    case ExprOp::cos: return std::cos(eval_expr(e->a, x));
  }
  throw std::logic_error("bad expression node");
}

Expr diff(const Expr& e, int var) {
  switch (e->op) {
    case ExprOp::constant: return constant(0);
    case ExprOp::variable: return constant(e->var == var ? 1 : 0);
    case ExprOp::add: return diff(e->a, var) + diff(e->b, var);
    case ExprOp::sub: return diff(e->a, var) - diff(e->b, var);
    case ExprOp::mul: return diff(e->a, var) * e->b + e->a * diff(e->b, var);
    case ExprOp::neg: return -diff(e->a, var);
    case ExprOp::powi:
      return constant(e->exponent) * powi(e->a, e->exponent - 1) * diff(e->a, var);
    case ExprOp::sin: return cos_e(e->a) * diff(e->a, var);
    case ExprOp::cos: return -sin_e(e->a) * diff(e->a, var);
  }
  throw std::logic_error("bad expression node");
}

void collect_vars(const Expr& e, std::set<int>& out) {
  if (e->op == ExprOp::variable) out.insert(e->var);
  if (e->a) collect_vars(e->a, out);
  if (e->b) collect_vars(e->b, out);
}

namespace {

void emit(const Expr& e, Tape& tape, int depth, int& max_depth) {
  switch (e->op) {
    case ExprOp::constant:
    case ExprOp::variable:
      ++depth;
      break;
    case ExprOp::add:
    case ExprOp::sub:
    case ExprOp::mul:
      emit(e->a, tape, depth, max_depth);
      emit(e->b, tape, depth + 1, max_depth);
      ++depth;
      break;
    case ExprOp::neg:
    case ExprOp::powi:
    case ExprOp::sin:
    case ExprOp::cos:
      emit(e->a, tape, depth, max_depth);
      ++depth;
      break;
  }
  if (depth > max_depth) max_depth = depth;
  tape.code.push_back({e->op, e->value, e->var, e->exponent});
}

}  // namespace

Tape compile(const Expr& e) {
  Tape tape;
  int max_depth = 0;
  emit(e, tape, 0, max_depth);
  tape.stack_need = max_depth + 1;
  return tape;
}

double Tape::eval(std::span<const double> x, std::vector<double>& stack) const {
  if (static_cast<int>(stack.size()) < stack_need) stack.resize(stack_need);
  int top = -1;
  for (const Instr& ins : code) {
    switch (ins.op) {
      case ExprOp::constant: stack[++top] = ins.value; break;
      case ExprOp::variable: stack[++top] = x[ins.var]; break;
      case ExprOp::add: --top; stack[top] += stack[top + 1]; break;
      case ExprOp::sub: --top; stack[top] -= stack[top + 1]; break;
      case ExprOp::mul: --top; stack[top] *= stack[top + 1]; break;
      case ExprOp::neg: stack[top] = -stack[top]; break;
      case ExprOp::powi: {
        double base = stack[top], r = 1;
        for (int i = 0; i < ins.exponent; ++i) r *= base;
        stack[top] = r;
        break;
      }
      case ExprOp::sin: stack[top] = std::sin(stack[top]); break;
      case ExprOp::cos: stack[top] = std::cos(stack[top]); break;
    }
  }
  return stack[top];
}

}  // namespace packing
