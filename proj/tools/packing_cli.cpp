#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "packing/io.hpp"
#include "packing/polish.hpp"
#include "packing/solver.hpp"
#include "packing/verify.hpp"

namespace {

using namespace packing;

int default_threads() {
  if (const char* env = std::getenv("PACKING_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

struct InstanceArgs {
  std::string family;
  int outer = 0, inner = 0, count = 1;
  std::string variant = "dist";
  double epsilon = 1e-8;

  void attach(CLI::App* cmd) {
    cmd->add_option("--family", family, "circle_square | circle_rect | circle_ellipse | polygon | platonic")
        ->required();
    cmd->add_option("--outer", outer, "outer polygon order / solid type 1..5 (body families)");
    cmd->add_option("--inner", inner, "inner polygon order / solid type 1..5 (body families)");
    cmd->add_option("--count", count, "number of packed elements")->required();
    cmd->add_option("--variant", variant, "dist | nodist | inner | farkas | sym");
    cmd->add_option("--epsilon", epsilon, "separation slack (default 1e-8)");
  }

  Instance build() const {
    Instance inst;
    const auto f = family_from_name(family);
    if (!f) throw CLI::ValidationError("--family", "unknown family: " + family);
    inst.family = *f;
    inst.l = outer;
    inst.m = inner;
    inst.n = count;
    const auto v = variant_from_name(variant);
    if (!v) throw CLI::ValidationError("--variant", "unknown variant: " + variant);
    inst.variant = *v;
    inst.epsilon = epsilon;
    inst.validate();
    return inst;
  }
};

void print_verify(const Instance& inst, const VerifyReport& rep, double tolerance) {
  std::printf("instance        %s\n", inst.id().c_str());
  std::printf("feasible        %s (tolerance %g)\n", rep.feasible ? "yes" : "no", tolerance);
  std::printf("worst residual  %.3e (%s)\n", rep.worst_residual, rep.worst_tag.c_str());
  std::printf("objective       %.12f\n", rep.objective);
  if (rep.registry_delta)
    std::printf("vs published    %+.6f\n", *rep.registry_delta);
  if (inst.is_circle())
    std::printf("area cut        %s\n", rep.area_cut_ok ? "ok" : "violated");
}

// Certificates become stale once polishing moves the poses; rebuild them from
// the separating axes of the polished solution.
std::vector<FarkasCertificate> rebuild_farkas(const Instance& inst, const Solution& sol) {
  std::vector<FarkasCertificate> out;
  const Layout lay = make_layout(inst);
  for (int i = 0; i < inst.n; ++i)
    for (int j = i + 1; j < inst.n; ++j) {
      try {
        FarkasCertificate c;
        if (inst.family == Family::polygon) {
          const RegularPolygonSpec sm = polygon_constants(inst.m);
          const int oi = lay.element_offset(i), oj = lay.element_offset(j);
          const Pose2 pi{sol.values[oi], sol.values[oi + 1], sol.values[oi + 2]};
          const Pose2 pj{sol.values[oj], sol.values[oj + 1], sol.values[oj + 2]};
          const SatResult2 sat = sat_margin_2d(pi, pj, sm);
          if (sat.margin < 0) continue;
          c = farkas_from_axis(pi, pj, sm, sat.axis);
        } else if (inst.family == Family::platonic) {
          const PlatonicSpec& sm = platonic_spec(platonic_from_index(inst.m));
          const int oi = lay.element_offset(i), oj = lay.element_offset(j);
          const Pose3 pi{sol.values[oi], sol.values[oi + 1], sol.values[oi + 2],
                         sol.values[oi + 3], sol.values[oi + 4], sol.values[oi + 5]};
          const Pose3 pj{sol.values[oj], sol.values[oj + 1], sol.values[oj + 2],
                         sol.values[oj + 3], sol.values[oj + 4], sol.values[oj + 5]};
          const SatResult3 sat = sat_margin_3d(pi, pj, sm);
          if (sat.margin < 0) continue;
          c = farkas_from_axis(pi, pj, sm, sat.axis);
        } else {
          continue;
        }
        c.i = i;
        c.j = j;
        out.push_back(std::move(c));
      } catch (const CertificateError&) {
      }
    }
  return out;
}

std::vector<SLemmaCertificate> rebuild_slemma(const Instance& inst, const Solution& sol) {
  std::vector<SLemmaCertificate> out;
  if (inst.family != Family::circle_ellipse) return out;
  const Layout lay = make_layout(inst);
  for (int i = 0; i < inst.n; ++i) {
    const int off = lay.element_offset(i);
    if (auto c = slemma_contains(sol.values[0], sol.values[1], sol.values[off],
                                 sol.values[off + 1], 1.0)) {
      c->circle = i;
      out.push_back(*c);
    }
  }
  return out;
}

int cmd_solve(const InstanceArgs& ia, const SolverConfig& cfg, const std::string& out) {
  const Instance inst = ia.build();
  const SolveReport rep = multistart(inst, cfg);
  std::printf("instance     %s\n", inst.id().c_str());
  std::printf("restarts     %d completed (%s)\n", rep.restarts_completed, rep.termination.c_str());
  if (!rep.best) {
    std::printf("no feasible solution found\n");
    return 1;
  }
  std::printf("objective    %.12f\n", rep.best->objective);
  SolutionDocument doc{inst, *rep.best, rep.farkas, rep.slemma};
  if (!out.empty()) {
    write_file(out, write_solution(doc));
    std::printf("wrote        %s\n", out.c_str());
  }
  return 0;
}

int cmd_polish(const std::string& file, const std::string& out) {
  SolutionDocument doc = read_solution(read_file(file));
  auto [polished, rep] = polish(doc.instance, doc.solution);
  std::printf("instance     %s\n", doc.instance.id().c_str());
  std::printf("objective    %.17g -> %.17g\n", rep.objective_before, rep.objective_after);
  std::printf("sigma %.12f  delta %.3e  verified %s\n", rep.sigma, rep.delta,
              rep.verified ? "yes" : "no");
  doc.solution = polished;
  doc.farkas = rebuild_farkas(doc.instance, polished);
  doc.slemma = rebuild_slemma(doc.instance, polished);
  write_file(out, write_solution(doc));
  std::printf("wrote        %s\n", out.c_str());
  return rep.verified ? 0 : 1;
}

int cmd_verify(const std::string& file, double tolerance) {
  const SolutionDocument doc = read_solution(read_file(file));
  const VerifyReport rep = verify(doc.instance, doc.solution, tolerance);
  print_verify(doc.instance, rep, tolerance);
  return rep.feasible ? 0 : 1;
}

int cmd_render(const std::string& file, const std::string& out) {
  const SolutionDocument doc = read_solution(read_file(file));
  std::string text;
  if (out.size() >= 4 && out.substr(out.size() - 4) == ".svg")
    text = render_svg(doc.instance, doc.solution);
  else if (out.size() >= 4 && out.substr(out.size() - 4) == ".obj")
    text = render_obj(doc.instance, doc.solution);
  else
    throw CLI::ValidationError("--out", "output must end in .svg or .obj");
  write_file(out, text);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_export(const InstanceArgs& ia, const std::string& out) {
  const Instance inst = ia.build();
  write_file(out, export_model(inst));
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

struct BenchCell {
  bool found = false;
  double objective = 0;
};

int cmd_bench(const std::string& family, const std::vector<std::string>& variants,
              const std::vector<int>& outers, const std::vector<int>& inners,
              const std::vector<int>& counts, double time_budget, int restarts,
              std::uint64_t seed, int threads) {
  const auto fam = family_from_name(family);
  if (!fam || (*fam != Family::polygon && *fam != Family::platonic))
    throw CLI::ValidationError("--family", "bench supports polygon and platonic");
  std::vector<Variant> vars;
  for (const std::string& v : variants) {
    const auto vv = variant_from_name(v);
    if (!vv) throw CLI::ValidationError("--variants", "unknown variant: " + v);
    vars.push_back(*vv);
  }
  if (std::find(vars.begin(), vars.end(), Variant::dist) == vars.end())
    vars.insert(vars.begin(), Variant::dist);  // baseline column

  struct Key {
    int l, m, n;
  };
  std::vector<Key> grid;
  for (int l : outers)
    for (int m : inners)
      for (int n : counts) grid.push_back({l, m, n});

  // cells[variant][instance]
  std::vector<std::vector<BenchCell>> cells(vars.size(), std::vector<BenchCell>(grid.size()));
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    for (size_t vi = 0; vi < vars.size(); ++vi) {
      Instance inst;
      inst.family = *fam;
      inst.l = grid[gi].l;
      inst.m = grid[gi].m;
      inst.n = grid[gi].n;
      inst.variant = vars[vi];
      inst.validate();
      SolverConfig cfg;
      cfg.restarts = restarts;
      cfg.time_budget = time_budget;
      cfg.seed = seed;
      cfg.threads = threads;
      const SolveReport rep = multistart(inst, cfg);
      if (rep.best) cells[vi][gi] = {true, rep.best->objective};
      std::printf("%-28s %-7s %s\n", inst.id().c_str(), variant_name(vars[vi]),
                  rep.best ? std::to_string(rep.best->objective).c_str() : "-");
      std::fflush(stdout);
    }
  }

  const size_t base = std::find(vars.begin(), vars.end(), Variant::dist) - vars.begin();
  std::printf("\n%-8s %6s %10s %10s %7s %7s\n", "variant", "found", "median", "mean", "better",
              "worse");
  for (size_t vi = 0; vi < vars.size(); ++vi) {
    int found = 0, better = 0, worse = 0;
    std::vector<double> rel;  // relative objective difference vs the dist column
    for (size_t gi = 0; gi < grid.size(); ++gi) {
      if (cells[vi][gi].found) ++found;
      if (!cells[vi][gi].found || !cells[base][gi].found) continue;
      const double d =
          (cells[vi][gi].objective - cells[base][gi].objective) / cells[base][gi].objective;
      rel.push_back(d);
      if (d < -1e-9) ++better;
      if (d > 1e-9) ++worse;
    }
    double median = 0, mean = 0;
    if (!rel.empty()) {
      std::vector<double> s = rel;
      std::sort(s.begin(), s.end());
      median = s.size() % 2 ? s[s.size() / 2] : (s[s.size() / 2 - 1] + s[s.size() / 2]) / 2;
      mean = std::accumulate(rel.begin(), rel.end(), 0.0) / rel.size();
    }
    std::printf("%-8s %6d %9.4f%% %9.4f%% %7d %7d\n", variant_name(vars[vi]), found, 100 * median,
                100 * mean, better, worse);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric packing toolkit: solve, polish, verify, render, export"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "run the multistart solver on one instance");
  InstanceArgs solve_args;
  solve_args.attach(solve);
  SolverConfig cfg;
  cfg.threads = default_threads();
  std::string solve_out;
  std::string mode = "sat-penalty";
  std::optional<double> target;
  solve->add_option("--restarts", cfg.restarts, "number of local solves (default 20)");
  solve->add_option("--time", cfg.time_budget, "wall-clock budget in seconds (default 60)");
  solve->add_option("--seed", cfg.seed, "PRNG seed (default 0)");
  solve->add_option("--mode", mode, "faithful | sat-penalty (default sat-penalty)");
  solve->add_option("--threads", cfg.threads, "worker threads (default $PACKING_THREADS or 1)");
  solve->add_option("--target", target, "stop once the objective is at least this good");
  solve->add_option("--out", solve_out, "solution file to write");

  // polish
  auto* polish_cmd = app.add_subcommand("polish", "restore exact feasibility in high precision");
  std::string polish_in, polish_out;
  polish_cmd->add_option("file", polish_in, "solution file")->required();
  polish_cmd->add_option("--out", polish_out, "polished solution file")->required();

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "check geometric feasibility");
  std::string verify_in;
  double tolerance = 0;
  verify_cmd->add_option("file", verify_in, "solution file")->required();
  verify_cmd->add_option("--tolerance", tolerance, "residual tolerance (default 0)");

  // render
  auto* render_cmd = app.add_subcommand("render", "draw a solution as SVG (2D) or OBJ (3D)");
  std::string render_in, render_out;
  render_cmd->add_option("file", render_in, "solution file")->required();
  render_cmd->add_option("--out", render_out, "output file, .svg or .obj")->required();

  // export
  auto* export_cmd = app.add_subcommand("export", "write the algebraic model of an instance");
  InstanceArgs export_args;
  export_args.attach(export_cmd);
  std::string export_out;
  export_cmd->add_option("--out", export_out, "model file to write")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "compare formulation variants over a grid");
  std::string bench_family = "polygon";
  std::vector<std::string> bench_variants = {"dist", "nodist", "inner", "farkas", "sym"};
  std::vector<int> bench_outer = {3, 4, 5}, bench_inner = {3, 4, 5}, bench_count = {2, 3, 4, 5, 6};
  double bench_time = 60;
  int bench_restarts = 8, bench_threads = default_threads();
  std::uint64_t bench_seed = 0;
  bench->add_option("--family", bench_family, "polygon | platonic (default polygon)");
  bench->add_option("--variants", bench_variants, "comma-separated variant list")
      ->delimiter(',');
  bench->add_option("--outer", bench_outer, "outer orders (default 3,4,5)")->delimiter(',');
  bench->add_option("--inner", bench_inner, "inner orders (default 3,4,5)")->delimiter(',');
  bench->add_option("--count", bench_count, "element counts (default 2..6)")->delimiter(',');
  bench->add_option("--time", bench_time, "per-solve budget in seconds (default 60)");
  bench->add_option("--restarts", bench_restarts, "restarts per solve (default 8)");
  bench->add_option("--seed", bench_seed, "PRNG seed (default 0)");
  bench->add_option("--threads", bench_threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (solve->parsed()) {
      const auto m = mode == "faithful"  ? SolveMode::faithful
                   : mode == "sat-penalty" ? SolveMode::sat_penalty
                                           : throw CLI::ValidationError("--mode", "unknown mode");
      cfg.mode = m;
      cfg.target_objective = target;
      return cmd_solve(solve_args, cfg, solve_out);
    }
    if (polish_cmd->parsed()) return cmd_polish(polish_in, polish_out);
    if (verify_cmd->parsed()) return cmd_verify(verify_in, tolerance);
    if (render_cmd->parsed()) return cmd_render(render_in, render_out);
    if (export_cmd->parsed()) return cmd_export(export_args, export_out);
    if (bench->parsed())
      return cmd_bench(bench_family, bench_variants, bench_outer, bench_inner, bench_count,
                       bench_time, bench_restarts, bench_seed, bench_threads);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
