#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "packing/expr.hpp"

using namespace packing;

namespace {

// Random expression over a fixed number of variables, depth-bounded.
Expr random_expr(std::mt19937_64& rng, int vars, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 8);
  std::uniform_real_distribution<double> c(-2, 2);
  switch (pick(rng)) {
    case 0: return constant(c(rng));
    case 1: return variable(std::uniform_int_distribution<int>(0, vars - 1)(rng));
    case 2: return random_expr(rng, vars, depth - 1) + random_expr(rng, vars, depth - 1);
    case 3: return random_expr(rng, vars, depth - 1) - random_expr(rng, vars, depth - 1);
    case 4: return random_expr(rng, vars, depth - 1) * random_expr(rng, vars, depth - 1);
    case 5: return -random_expr(rng, vars, depth - 1);
    case 6: return powi(random_expr(rng, vars, depth - 1),
                        std::uniform_int_distribution<int>(0, 4)(rng));
    case 7: return sin_e(random_expr(rng, vars, depth - 1));
    default: return cos_e(random_expr(rng, vars, depth - 1));
  }
}

}  // namespace

TEST_CASE("evaluation of hand-built expressions") {
  const Expr x = variable(0), y = variable(1);
  const Expr e = sq(x - 0.5) + 3.0 * sin_e(y) - powi(y, 3);
  const double vals[] = {2.0, 0.7};
  const double expect = 1.5 * 1.5 + 3 * std::sin(0.7) - 0.7 * 0.7 * 0.7;
  CHECK(eval_expr(e, vals) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("constants fold at construction") {
  const Expr e = constant(2) * constant(3) + constant(1);
  CHECK(e->op == ExprOp::constant);
  CHECK(e->value == 7.0);
  // Neutral elements simplify away.
  const Expr x = variable(0);
  CHECK((x + 0.0)->op == ExprOp::variable);
  CHECK((x * 1.0)->op == ExprOp::variable);
  CHECK((x * 0.0)->op == ExprOp::constant);
  CHECK(powi(x, 1)->op == ExprOp::variable);
  CHECK(powi(x, 0)->value == 1.0);
}

TEST_CASE("derivatives match central finite differences") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const int vars = 4;
  for (int trial = 0; trial < 300; ++trial) {
    const Expr e = random_expr(rng, vars, 4);
    std::vector<double> x(vars);
    for (double& v : x) v = u(rng);
    const double f0 = eval_expr(e, x);
    if (!std::isfinite(f0) || std::abs(f0) > 1e6) continue;  // wild polynomials
    for (int k = 0; k < vars; ++k) {
      const Expr d = diff(e, k);
      const double h = 1e-6;
      std::vector<double> up = x, dn = x;
      up[k] += h;
      dn[k] -= h;
      const double fd = (eval_expr(e, up) - eval_expr(e, dn)) / (2 * h);
      if (!std::isfinite(fd) || std::abs(fd) > 1e6) continue;
      CHECK(eval_expr(d, x) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("compiled tapes agree with tree evaluation") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<double> stack;
  for (int trial = 0; trial < 500; ++trial) {
    const Expr e = random_expr(rng, 5, 5);
    const Tape tape = compile(e);
    std::vector<double> x(5);
    for (double& v : x) v = u(rng);
    const double a = eval_expr(e, x);
    const double b = tape.eval(x, stack);
    if (std::isfinite(a)) CHECK(a == b);  // identical operation order, bitwise equal
  }
}

TEST_CASE("collect_vars finds exactly the referenced variables") {
  const Expr e = variable(2) * sin_e(variable(5)) + powi(variable(2), 3);
  std::set<int> vars;
  collect_vars(e, vars);
  CHECK(vars == std::set<int>{2, 5});
}
