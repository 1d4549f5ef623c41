// Acceptance gates: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Long-running budgets scale with PACKING_ACCEPT_BUDGET_SCALE
// (default 1); every solve stops early once its target is reached.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <random>
#include <vector>

#include "packing/io.hpp"
#include "packing/polish.hpp"
#include "packing/solver.hpp"
#include "packing/verify.hpp"

using namespace packing;

namespace {

constexpr double kPi = std::numbers::pi;
double g_scale = 1.0;
int g_failures = 0;

void report(int index, bool pass, const char* fmt, ...) {
  std::printf("%s  %d. ", pass ? "PASS" : "FAIL", index);
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

SolveReport solve(const Instance& inst, int restarts, double budget,
                  std::optional<double> target = std::nullopt, std::uint64_t seed = 0) {
  SolverConfig cfg;
  cfg.restarts = restarts;
  cfg.time_budget = budget;
  cfg.target_objective = target;
  cfg.seed = seed;
  return multistart(inst, cfg);
}

// ---- criterion 1: identity packings ----------------------------------------

void criterion_identity() {
  bool ok = true;
  char detail[256] = "";
  auto check_one = [&](const Instance& inst) {
    const double t0 = now_seconds();
    const SolveReport rep = solve(inst, 8, 9.0, 1 + 1e-6);
    const double elapsed = now_seconds() - t0;
    bool this_ok = rep.best && std::abs(rep.best->objective - 1.0) <= 1e-6 && elapsed < 10;
    if (this_ok) {
      const auto [polished, prep] = polish(inst, *rep.best);
      this_ok = prep.verified && polished.values[0] >= 1 - 1e-12 &&
                verify(inst, polished, 0).feasible;
    }
    if (!this_ok && !detail[0])
      std::snprintf(detail, sizeof detail, " (first failure: %s, R=%.9f, %.1fs)",
                    inst.id().c_str(), rep.best ? rep.best->objective : -1.0, elapsed);
    ok = ok && this_ok;
  };
  for (int l = 3; l <= 8; ++l) {
    Instance inst;
    inst.family = Family::polygon;
    inst.l = inst.m = l;
    inst.n = 1;
    check_one(inst);
  }
  for (int s = 1; s <= 5; ++s) {
    Instance inst;
    inst.family = Family::platonic;
    inst.l = inst.m = s;
    inst.n = 1;
    check_one(inst);
  }
  report(1, ok, "identity packings l=m, n=1: R = 1 within 1e-6 pre-polish, >= 1-1e-12 "
                "post-polish, < 10 s each%s", detail);
}

// ---- criterion 2: circle family --------------------------------------------

void criterion_circles() {
  Instance two;
  two.family = Family::circle_square;
  two.n = 2;
  const double opt2 = 2 - std::sqrt(2.0);
  const SolveReport r2 = solve(two, 100, 60 * g_scale, opt2 - 1e-4);
  const bool ok2 = r2.best && r2.best->objective >= opt2 - 1e-4;

  Instance big;
  big.family = Family::circle_square;
  big.n = 32;
  const SolveReport r32 = solve(big, 100000, 1800 * g_scale, 2.85);
  const bool ok32 = r32.best && r32.best->objective >= 2.85;
  report(2, ok2 && ok32,
         "circles in the unit square: n=2 objective %.6f >= %.6f; n=32 objective %.5f >= 2.85 "
         "(published 2.93957)",
         r2.best ? r2.best->objective : -1.0, opt2 - 1e-4,
         r32.best ? r32.best->objective : -1.0);
}

// ---- criterion 3: ellipse family -------------------------------------------

void criterion_ellipse() {
  Instance one;
  one.family = Family::circle_ellipse;
  one.n = 1;
  one.epsilon = 1e-12;  // the model's optimum is pi*(1+2*eps)^2, so a 1e-8
                        // match against pi needs a slack far below it
  const SolveReport r1 = solve(one, 5, 30 * g_scale);
  const bool ok1 = r1.best && std::abs(r1.best->objective - kPi) <= 1e-8;

  Instance nine;
  nine.family = Family::circle_ellipse;
  nine.n = 9;
  const double target = 1.05 * kPi * 12.2708;
  const SolveReport r9 = solve(nine, 100000, 1800 * g_scale, target);
  bool ok9 = r9.best && r9.best->objective <= target;
  bool certs_ok = r9.best && static_cast<int>(r9.slemma.size()) == nine.n;
  if (certs_ok) {
    const Layout lay = make_layout(nine);
    for (const SLemmaCertificate& c : r9.slemma)
      certs_ok = certs_ok &&
                 slemma_check(c, r9.best->values[0], r9.best->values[1],
                              r9.best->values[lay.element_offset(c.circle)],
                              r9.best->values[lay.element_offset(c.circle) + 1], 1.0);
  }
  report(3, ok1 && ok9 && certs_ok,
         "unit circles in an ellipse: n=1 area %.9f vs pi; n=9 area %.5f <= %.5f "
         "(published pi*12.2708 = %.5f); certificates %s",
         r1.best ? r1.best->objective : -1.0, r9.best ? r9.best->objective : -1.0, target,
         kPi * 12.2708, certs_ok ? "valid" : "INVALID");
}

// ---- criterion 4: polygon incumbents ---------------------------------------

void criterion_polygon() {
  Instance hard;
  hard.family = Family::polygon;
  hard.l = 5;
  hard.m = 3;
  hard.n = 6;
  const double target = 1.01 * 2.05332;
  const SolveReport rep = solve(hard, 100000, 600 * g_scale, target);
  const bool ok_hard = rep.best && rep.best->objective <= target;

  bool ok_bound = true;
  double worst_slack = 1e9;
  for (int n : {2, 3, 4}) {
    Instance hex;
    hex.family = Family::polygon;
    hex.l = hex.m = 6;
    hex.n = n;
    const SolveReport r = solve(hex, 6, 60 * g_scale);
    const double rmin = std::sqrt(static_cast<double>(n));
    if (!r.best || r.best->objective < rmin) ok_bound = false;
    if (r.best) worst_slack = std::min(worst_slack, r.best->objective - rmin);
  }
  report(4, ok_hard && ok_bound,
         "triangles in a pentagon (n=6): R %.5f <= %.5f (published 2.05332); hexagon-in-hexagon "
         "R >= sqrt(n) with slack >= %.2e",
         rep.best ? rep.best->objective : -1.0, target, worst_slack);
}

// ---- criterion 5: platonic sanity ------------------------------------------

void criterion_platonic() {
  Instance eight;
  eight.family = Family::platonic;
  eight.l = eight.m = 3;
  eight.n = 8;
  const SolveReport r8 = solve(eight, 100000, 1800 * g_scale, 2 + 1e-6);
  const bool ok8 = r8.best && r8.best->objective <= 2 + 1e-6;

  // Soft target, reported but not gated (the published 2-hour budget does not
  // fit a test run; scale the budget up to chase 1.03 * 2.89445).
  Instance eleven;
  eleven.family = Family::platonic;
  eleven.l = eleven.m = 3;
  eleven.n = 11;
  const SolveReport r11 = solve(eleven, 100000, 600 * g_scale, 1.03 * 2.89445);
  report(5, ok8,
         "cube in cube: n=8 R %.7f <= 2+1e-6; n=11 R %.5f vs soft target %.5f (published "
         "2.89445, not gated)",
         r8.best ? r8.best->objective : -1.0, r11.best ? r11.best->objective : -1.0,
         1.03 * 2.89445);
}

// ---- criterion 6: oracle equivalence ---------------------------------------

bool ellipse_contains_oracle(double a, double b, double x0, double y0, double r) {
  if ((x0 * x0) / (a * a) + (y0 * y0) / (b * b) > 1) return false;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4096; ++k) {
    const double phi = 2 * kPi * k / 4096;
    const double dx = a * std::cos(phi) - x0, dy = b * std::sin(phi) - y0;
    best = std::min(best, dx * dx + dy * dy);
  }
  return std::sqrt(best) >= r;
}

void criterion_oracles() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-2.5, 2.5), ang(0, 2 * kPi);

  // Farkas vs SAT, 2D.
  const RegularPolygonSpec pent = polygon_constants(5);
  int bad2 = 0, done2 = 0, sparse_bad = 0;
  while (done2 < 10000) {
    const Pose2 a{u(rng), u(rng), ang(rng)};
    const Pose2 b{u(rng), u(rng), ang(rng)};
    const SatResult2 sat = sat_margin_2d(a, b, pent);
    if (std::abs(sat.margin) < 1e-9) continue;  // outside the ambiguity band only
    ++done2;
    if (sat.margin > 0) {
      try {
        const FarkasCertificate c = farkas_from_axis(a, b, pent, sat.axis);
        if (!farkas_check(c, a, b, pent)) ++bad2;
        int nz_i = 0, nz_j = 0;
        for (int k = 0; k < pent.m; ++k) {
          if (c.lambdas[k] > 1e-12) ++nz_i;
          if (c.lambdas[pent.m + k] > 1e-12) ++nz_j;
        }
        if (nz_i > 2 || nz_j > 2) ++sparse_bad;
      } catch (const CertificateError&) {
        ++bad2;
      }
    } else {
      try {
        const FarkasCertificate c = farkas_from_axis(a, b, pent, sat.axis);
        if (farkas_check(c, a, b, pent)) ++bad2;  // must not certify an overlap
      } catch (const CertificateError&) {
      }
    }
  }

  // Farkas vs SAT, 3D.
  const PlatonicSpec& icosa = platonic_spec(PlatonicKind::icosahedron);
  int bad3 = 0, done3 = 0;
  std::uniform_real_distribution<double> u3(-2, 2);
  while (done3 < 2000) {
    const Pose3 a{u3(rng), u3(rng), u3(rng), ang(rng), ang(rng), ang(rng)};
    const Pose3 b{u3(rng), u3(rng), u3(rng), ang(rng), ang(rng), ang(rng)};
    const SatResult3 sat = sat_margin_3d(a, b, icosa);
    if (std::abs(sat.margin) < 1e-9) continue;
    ++done3;
    if (sat.margin > 0) {
      try {
        const FarkasCertificate c = farkas_from_axis(a, b, icosa, sat.axis);
        if (!farkas_check(c, a, b, icosa)) ++bad3;
        const int f = static_cast<int>(icosa.faces.size());
        int nz_i = 0, nz_j = 0;
        for (int k = 0; k < f; ++k) {
          if (c.lambdas[k] > 1e-12) ++nz_i;
          if (c.lambdas[f + k] > 1e-12) ++nz_j;
        }
        if (nz_i > 3 || nz_j > 3) ++sparse_bad;
      } catch (const CertificateError&) {
        ++bad3;
      }
    }
  }

  // S-lemma vs boundary sampling.
  int bads = 0, dones = 0;
  while (dones < 10000) {
    const double a = std::uniform_real_distribution<double>(1.0, 5.0)(rng);
    const double b = std::uniform_real_distribution<double>(0.5, a)(rng);
    const double r = std::uniform_real_distribution<double>(0.2, 2.0)(rng);
    const double x0 = std::uniform_real_distribution<double>(-4.0, 4.0)(rng);
    const double y0 = std::uniform_real_distribution<double>(-4.0, 4.0)(rng);
    // Outside the ambiguity band: perturbing r by 1e-9 must not flip the verdict.
    if (slemma_contains(a, b, x0, y0, r + 1e-9).has_value() !=
        slemma_contains(a, b, x0, y0, r - 1e-9).has_value())
      continue;
    ++dones;
    if (slemma_contains(a, b, x0, y0, r).has_value() != ellipse_contains_oracle(a, b, x0, y0, r))
      ++bads;
  }

  report(6, bad2 == 0 && bad3 == 0 && bads == 0 && sparse_bad == 0,
         "oracle equivalence: Farkas vs SAT 2D %d/10000, 3D %d/2000 disagreements; S-lemma vs "
         "boundary sampling %d/10000; sparsity violations %d",
         bad2, bad3, bads, sparse_bad);
}

// ---- criterion 7: polishing gate -------------------------------------------

void criterion_polish() {
  std::vector<Instance> jobs;
  for (int n = 2; n <= 6; ++n) {
    Instance a;
    a.family = Family::circle_square;
    a.n = n;
    jobs.push_back(a);
    Instance b;
    b.family = Family::circle_rect;
    b.n = n;
    jobs.push_back(b);
  }
  for (int n = 2; n <= 5; ++n) {
    Instance c;
    c.family = Family::circle_ellipse;
    c.n = n;
    jobs.push_back(c);
  }
  for (auto [l, m] : {std::pair{5, 3}, {4, 4}, {6, 3}, {6, 4}, {7, 3}})
    for (int n = 2; n <= 4; ++n) {
      Instance d;
      d.family = Family::polygon;
      d.l = l;
      d.m = m;
      d.n = n;
      jobs.push_back(d);
    }
  for (auto [l, m] : {std::pair{3, 3}, {3, 1}, {2, 2}, {3, 2}, {1, 1}})
    for (int n = 2; n <= 3; ++n) {
      Instance e;
      e.family = Family::platonic;
      e.l = l;
      e.m = m;
      e.n = n;
      jobs.push_back(e);
    }
  // 10 + 4 + 15 + 10 = 39; top up with larger circle counts to reach 50.
  for (int n = 7; n <= 17; ++n) {
    Instance a;
    a.family = Family::circle_square;
    a.n = n;
    jobs.push_back(a);
  }

  int total = 0, passed = 0;
  double worst_body_degradation = 0;
  bool circles_monotone = true;
  std::mt19937_64 seeds(202);
  for (const Instance& inst : jobs) {
    if (total == 50) break;
    const SolveReport rep = solve(inst, 6, 30 * g_scale, std::nullopt, seeds());
    if (!rep.best) continue;  // need a solver output to polish
    ++total;
    try {
      const auto [polished, prep] = polish(inst, *rep.best);
      const bool feas = verify(inst, polished, 0).feasible;
      if (feas && prep.verified) ++passed;
      if (inst.is_body()) {
        const double deg = (polished.objective - rep.best->objective) /
                           std::max(1.0, rep.best->objective);
        worst_body_degradation = std::max(worst_body_degradation, deg);
      }
      if (inst.is_circle() && polished.objective < rep.best->objective)
        circles_monotone = false;
    } catch (const std::exception&) {
    }
  }
  report(7, total == 50 && passed == 50 && worst_body_degradation < 1e-6 && circles_monotone,
         "polishing gate: %d/%d solver outputs verify at tolerance 0 after polish; worst body "
         "objective growth %.2e; circle objectives monotone: %s",
         passed, total, worst_body_degradation, circles_monotone ? "yes" : "no");
}

// ---- criterion 8: numerical gates -------------------------------------------

void criterion_numerics() {
  std::mt19937_64 rng(303);
  EvalScratch scratch;
  double worst_jac = 0;
  std::vector<Instance> insts;
  {
    Instance a;
    a.family = Family::circle_square;
    a.n = 3;
    insts.push_back(a);
    Instance b;
    b.family = Family::circle_rect;
    b.n = 2;
    insts.push_back(b);
    Instance c;
    c.family = Family::circle_ellipse;
    c.n = 2;
    insts.push_back(c);
    Instance d;
    d.family = Family::polygon;
    d.l = 5;
    d.m = 3;
    d.n = 2;
    insts.push_back(d);
    Instance e;
    e.family = Family::platonic;
    e.l = 3;
    e.m = 3;
    e.n = 2;
    insts.push_back(e);
  }
  for (const Instance& inst : insts) {
    const ConstraintSystem sys = build_system(inst);
    std::uniform_real_distribution<double> uu(0.05, 0.95);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(sys.dim());
      for (int i = 0; i < sys.dim(); ++i) x[i] = sys.lb[i] + uu(rng) * (sys.ub[i] - sys.lb[i]);
      for (const ResidualRow& row : sys.rows)
        for (const auto& [var, grad_tape] : row.grad) {
          const double analytic = grad_tape.eval(x, scratch.stack);
          const double h = 1e-6;
          std::vector<double> up = x, dn = x;
          up[var] += h;
          dn[var] -= h;
          const double fd =
              (row.tape.eval(up, scratch.stack) - row.tape.eval(dn, scratch.stack)) / (2 * h);
          const double rel = std::abs(analytic - fd) / std::max({1.0, std::abs(analytic)});
          worst_jac = std::max(worst_jac, rel);
        }
    }
  }

  // Variant nesting: sym adds rows to dist, dist adds rows to nodist, so the
  // max violation can only grow; in particular feasible sets nest.
  Instance base;
  base.family = Family::polygon;
  base.l = 5;
  base.m = 4;
  base.n = 3;
  Instance dist = base, nodist = base, sym = base;
  dist.variant = Variant::dist;
  nodist.variant = Variant::nodist;
  sym.variant = Variant::sym;
  const ConstraintSystem s_dist = build_system(dist);
  const ConstraintSystem s_nodist = build_system(nodist);
  const ConstraintSystem s_sym = build_system(sym);
  int nest_bad = 0;
  auto viol = [&scratch](const ConstraintSystem& sys, const std::vector<double>& x) {
    std::vector<double> r;
    sys.residuals(x, r, scratch);
    double v = 0;
    size_t k = 0;
    for (const ResidualRow& row : sys.rows) {
      v = std::max(v, row.equality ? std::abs(r[k]) : r[k]);
      ++k;
    }
    return v;
  };
  std::uniform_real_distribution<double> uu(0.05, 0.95);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(s_sym.dim());
    for (int i = 0; i < s_sym.dim(); ++i)
      x[i] = s_sym.lb[i] + uu(rng) * (s_sym.ub[i] - s_sym.lb[i]);
    const double vn = viol(s_nodist, x), vd = viol(s_dist, x), vs = viol(s_sym, x);
    if (vn > vd + 1e-12 || vd > vs + 1e-12) ++nest_bad;
  }

  report(8, worst_jac < 1e-6 && nest_bad == 0,
         "numerical gates: worst Jacobian-vs-FD relative error %.2e (< 1e-6); variant nesting "
         "Sym <= Dist <= Nodist violated on %d/1000 points",
         worst_jac, nest_bad);
}

// ---- criterion 9: variant study shape ---------------------------------------

void criterion_bench() {
  const std::vector<Variant> variants = {Variant::dist, Variant::nodist, Variant::inner,
                                         Variant::farkas, Variant::sym};
  std::vector<int> found(variants.size(), 0);
  int instances = 0;
  for (int l = 3; l <= 5; ++l)
    for (int m = 3; m <= 5; ++m)
      for (int n = 2; n <= 6; ++n) {
        ++instances;
        for (size_t vi = 0; vi < variants.size(); ++vi) {
          Instance inst;
          inst.family = Family::polygon;
          inst.l = l;
          inst.m = m;
          inst.n = n;
          inst.variant = variants[vi];
          const SolveReport rep = solve(inst, 3, std::min(60.0, 20 * g_scale));
          if (rep.best) ++found[vi];
        }
      }
  std::printf("      variant-study found counts over %d instances:", instances);
  bool dist_wins = true;
  for (size_t vi = 0; vi < variants.size(); ++vi) {
    std::printf(" %s=%d", variant_name(variants[vi]), found[vi]);
    if (found[vi] > found[0]) dist_wins = false;
  }
  std::printf("\n");
  report(9, dist_wins,
         "variant study (polygon l,m in {3,4,5}, n in {2..6}): dist found %d instances, >= every "
         "alternative",
         found[0]);
}

}  // namespace

int main() {
  if (const char* env = std::getenv("PACKING_ACCEPT_BUDGET_SCALE")) {
    const double v = std::atof(env);
    if (v > 0) g_scale = v;
  }
  std::printf("acceptance run, budget scale %.3g\n", g_scale);
  criterion_identity();
  criterion_circles();
  criterion_ellipse();
  criterion_polygon();
  criterion_platonic();
  criterion_oracles();
  criterion_polish();
  criterion_numerics();
  criterion_bench();
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
