#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "packing/solver.hpp"
#include "packing/verify.hpp"

using namespace packing;

TEST_CASE("restart streams are reproducible and independent") {
  std::mt19937_64 a = restart_rng(123, 0);
  std::mt19937_64 b = restart_rng(123, 0);
  std::mt19937_64 c = restart_rng(123, 1);
  std::mt19937_64 d = restart_rng(124, 0);
  CHECK(a() == b());
  CHECK(a() == b());
  std::mt19937_64 a2 = restart_rng(123, 0);
  CHECK(a2() != c());
  CHECK(restart_rng(123, 0)() != d());
}

TEST_CASE("start samples respect the variable box") {
  Instance inst;
  inst.family = Family::polygon;
  inst.l = 5;
  inst.m = 4;
  inst.n = 3;
  const ConstraintSystem sys = build_system(inst);
  for (int r = 0; r < 50; ++r) {
    std::mt19937_64 rng = restart_rng(7, r);
    const std::vector<double> x = sample_start(sys, rng);
    REQUIRE(static_cast<int>(x.size()) == sys.dim());
    for (int i = 0; i < sys.dim(); ++i) {
      CHECK(x[i] >= sys.lb[i] - 1e-12);
      CHECK(x[i] <= sys.ub[i] + 1e-12);
    }
  }
}

TEST_CASE("multistart is deterministic for a fixed seed") {
  Instance inst;
  inst.family = Family::circle_square;
  inst.n = 3;
  SolverConfig cfg;
  cfg.restarts = 6;
  cfg.time_budget = 60;
  cfg.seed = 42;
  const SolveReport r1 = multistart(inst, cfg);
  const SolveReport r2 = multistart(inst, cfg);
  REQUIRE(r1.best);
  REQUIRE(r2.best);
  CHECK(r1.best->objective == r2.best->objective);  // bitwise
  CHECK(r1.best->values == r2.best->values);
  CHECK(r1.incumbents == r2.incumbents);
}

TEST_CASE("incumbent sequence improves monotonically") {
  Instance inst;
  inst.family = Family::circle_square;
  inst.n = 4;
  SolverConfig cfg;
  cfg.restarts = 12;
  cfg.time_budget = 60;
  const SolveReport rep = multistart(inst, cfg);
  REQUIRE(rep.best);
  for (size_t k = 1; k < rep.incumbents.size(); ++k) {
    CHECK(rep.incumbents[k].second > rep.incumbents[k - 1].second);  // maximization
    CHECK(rep.incumbents[k].first > rep.incumbents[k - 1].first);
  }
  CHECK(rep.best->objective == rep.incumbents.back().second);
}

TEST_CASE("two circles in the unit square reach the analytic optimum") {
  Instance inst;
  inst.family = Family::circle_square;
  inst.n = 2;
  SolverConfig cfg;
  cfg.restarts = 100;
  cfg.time_budget = 120;
  const double target = 2 - std::sqrt(2.0);
  int hits = 0;
  // Success-rate check: at least half of single-restart solves land on it.
  for (int r = 0; r < 20; ++r) {
    const ConstraintSystem sys = build_system(inst);
    std::mt19937_64 rng = restart_rng(1000, r);
    SolverConfig one = cfg;
    one.restarts = 1;
    const LocalResult res = local_solve(sys, sample_start(sys, rng), one);
    if (res.feasible && res.objective >= target - 1e-4) ++hits;
  }
  CHECK(hits >= 10);
}

TEST_CASE("local solves respect bounds and report violations") {
  Instance inst;
  inst.family = Family::circle_rect;
  inst.n = 2;
  const ConstraintSystem sys = build_system(inst);
  std::mt19937_64 rng = restart_rng(5, 0);
  SolverConfig cfg;
  const LocalResult res = local_solve(sys, sample_start(sys, rng), cfg);
  REQUIRE(static_cast<int>(res.x.size()) == sys.dim());
  for (int i = 0; i < sys.dim(); ++i) {
    CHECK(res.x[i] >= sys.lb[i] - 1e-12);
    CHECK(res.x[i] <= sys.ub[i] + 1e-12);
  }
  if (res.feasible) CHECK(res.max_violation <= 1e-8);
}

TEST_CASE("solved bodies come back with valid pair certificates") {
  Instance inst;
  inst.family = Family::polygon;
  inst.l = 4;
  inst.m = 4;
  inst.n = 2;
  SolverConfig cfg;
  cfg.restarts = 6;
  cfg.time_budget = 60;
  const SolveReport rep = multistart(inst, cfg);
  REQUIRE(rep.best);
  CHECK(rep.best->objective == doctest::Approx(2.0).epsilon(1e-4));
  REQUIRE(rep.farkas.size() == 1);
  const RegularPolygonSpec spec = polygon_constants(4);
  const Layout lay = make_layout(inst);
  const auto& x = rep.best->values;
  const Pose2 pi{x[lay.element_offset(0)], x[lay.element_offset(0) + 1],
                 x[lay.element_offset(0) + 2]};
  const Pose2 pj{x[lay.element_offset(1)], x[lay.element_offset(1) + 1],
                 x[lay.element_offset(1) + 2]};
  CHECK(farkas_check(rep.farkas[0], pi, pj, spec));
}

TEST_CASE("ellipse solve carries slemma certificates and hits the known optimum") {
  Instance inst;
  inst.family = Family::circle_ellipse;
  inst.n = 2;
  SolverConfig cfg;
  cfg.restarts = 10;
  cfg.time_budget = 120;
  const SolveReport rep = multistart(inst, cfg);
  REQUIRE(rep.best);
  // Two unit circles: optimal area is (3*sqrt(3)/2) * pi.
  const double opt = 1.5 * std::sqrt(3.0) * std::numbers::pi;
  CHECK(rep.best->objective <= opt * 1.001);
  CHECK(rep.best->objective >= opt * 0.999);
  CHECK(rep.slemma.size() == 2);
  for (const SLemmaCertificate& c : rep.slemma)
    CHECK(slemma_check(c, rep.best->values[0], rep.best->values[1],
                       rep.best->values[make_layout(inst).element_offset(c.circle)],
                       rep.best->values[make_layout(inst).element_offset(c.circle) + 1], 1.0));
}

TEST_CASE("faithful and penalty modes agree on an easy body instance") {
  Instance inst;
  inst.family = Family::polygon;
  inst.l = 6;
  inst.m = 6;
  inst.n = 1;
  for (SolveMode mode : {SolveMode::faithful, SolveMode::sat_penalty}) {
    SolverConfig cfg;
    cfg.restarts = 3;
    cfg.time_budget = 30;
    cfg.mode = mode;
    const SolveReport rep = multistart(inst, cfg);
    REQUIRE(rep.best);
    CHECK(rep.best->objective == doctest::Approx(1.0).epsilon(1e-5));
    const VerifyReport v = verify(inst, *rep.best, 1e-7);
    CHECK(v.feasible);
  }
}
