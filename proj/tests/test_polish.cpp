#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "packing/polish.hpp"
#include "packing/solver.hpp"
#include "packing/verify.hpp"

using namespace packing;

namespace {

Solution solve_one(const Instance& inst, int restarts, std::uint64_t seed = 0) {
  SolverConfig cfg;
  cfg.restarts = restarts;
  cfg.time_budget = 120;
  cfg.seed = seed;
  const SolveReport rep = multistart(inst, cfg);
  REQUIRE(rep.best);
  return *rep.best;
}

}  // namespace

TEST_CASE("synthetic circle slack is consumed") {
  // Two quarter-radius circles in opposite corners: lots of slack everywhere.
  Instance inst;
  inst.family = Family::circle_square;
  inst.n = 2;
  Solution sol;
  sol.instance_id = inst.id();
  sol.values = {0.25, 0.25, 0.2, 0.75, 0.75, 0.2};
  sol.objective = 0.4;
  const auto [polished, rep] = polish(inst, sol);
  CHECK(rep.verified);
  CHECK(polished.objective > 0.4);
  CHECK(rep.delta > 0.01);  // the uniform phase alone grows them visibly
  CHECK(verify(inst, polished, 0).feasible);
}

TEST_CASE("circle polishing never decreases the objective") {
  std::mt19937_64 seeds(61);
  for (int trial = 0; trial < 5; ++trial) {
    Instance inst;
    inst.family = trial % 2 ? Family::circle_rect : Family::circle_square;
    inst.n = 2 + trial;
    const Solution sol = solve_one(inst, 6, seeds());
    const auto [polished, rep] = polish(inst, sol);
    CHECK(rep.verified);
    CHECK(polished.objective >= sol.objective);
    CHECK(verify(inst, polished, 0).feasible);
    // Radius increments are per-circle and nonnegative.
    REQUIRE(static_cast<int>(rep.radius_increments.size()) == inst.n);
    for (double inc : rep.radius_increments) CHECK(inc >= 0);
  }
}

TEST_CASE("polishing is idempotent up to safety margins") {
  Instance inst;
  inst.family = Family::circle_square;
  inst.n = 4;
  const Solution sol = solve_one(inst, 8);
  const auto [p1, r1] = polish(inst, sol);
  const auto [p2, r2] = polish(inst, p1);
  CHECK(r2.verified);
  CHECK(std::abs(p2.objective - p1.objective) / p1.objective < 1e-12);
}

TEST_CASE("body polishing keeps angles bit-identical") {
  Instance inst;
  inst.family = Family::polygon;
  inst.l = 5;
  inst.m = 3;
  inst.n = 3;
  const Solution sol = solve_one(inst, 8);
  const auto [polished, rep] = polish(inst, sol);
  CHECK(rep.verified);
  CHECK(verify(inst, polished, 0).feasible);
  const Layout lay = make_layout(inst);
  for (int i = 0; i < inst.n; ++i)
    CHECK(polished.values[lay.element_offset(i) + 2] == sol.values[lay.element_offset(i) + 2]);
  // The circumradius stays close to the solver's value.
  CHECK(std::abs(polished.values[0] - sol.values[0]) / sol.values[0] < 1e-6);
}

TEST_CASE("solid polishing keeps rotation angles bit-identical") {
  Instance inst;
  inst.family = Family::platonic;
  inst.l = 3;
  inst.m = 3;
  inst.n = 2;
  const Solution sol = solve_one(inst, 4);
  const auto [polished, rep] = polish(inst, sol);
  CHECK(rep.verified);
  CHECK(verify(inst, polished, 0).feasible);
  const Layout lay = make_layout(inst);
  for (int i = 0; i < inst.n; ++i)
    for (int k = 3; k < 6; ++k)
      CHECK(polished.values[lay.element_offset(i) + k] == sol.values[lay.element_offset(i) + k]);
}

TEST_CASE("ellipse polishing yields exactly verifiable containment") {
  Instance inst;
  inst.family = Family::circle_ellipse;
  inst.n = 3;
  const Solution sol = solve_one(inst, 8);
  const auto [polished, rep] = polish(inst, sol);
  CHECK(rep.verified);
  CHECK(verify(inst, polished, 0).feasible);
  // Area may grow slightly to restore feasibility but not by much.
  CHECK(polished.objective <= sol.objective * (1 + 1e-5));
}

TEST_CASE("already-exact solutions pass through unchanged in objective") {
  // Unit triangle in unit triangle, already feasible at machine precision.
  Instance inst;
  inst.family = Family::polygon;
  inst.l = 3;
  inst.m = 3;
  inst.n = 1;
  Solution sol;
  sol.instance_id = inst.id();
  sol.values.assign(make_layout(inst).size(), 0.0);
  sol.values[0] = 1.0;  // R
  sync_aux_variables(build_system(inst), sol.values);
  sol.objective = 1.0;
  const auto [polished, rep] = polish(inst, sol);
  CHECK(rep.verified);
  CHECK(rep.sigma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(polished.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(verify(inst, polished, 0).feasible);
}

TEST_CASE("garbage input is rejected") {
  Instance inst;
  inst.family = Family::circle_square;
  inst.n = 2;
  Solution sol;
  sol.instance_id = inst.id();
  sol.values = {0.5, 0.5, 0.4, 0.5, 0.5, 0.4};  // heavily overlapping
  sol.objective = 0.8;
  CHECK_THROWS_AS(polish(inst, sol), PolishError);
}
