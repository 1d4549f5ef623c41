#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "packing/io.hpp"
#include "packing/solver.hpp"
#include "test_util.hpp"

using namespace packing;
using namespace packing::testutil;

namespace {

std::vector<Instance> sample_instances() {
  std::vector<Instance> out;
  Instance a;
  a.family = Family::circle_square;
  a.n = 3;
  out.push_back(a);
  Instance b;
  b.family = Family::circle_rect;
  b.n = 2;
  out.push_back(b);
  Instance c;
  c.family = Family::circle_ellipse;
  c.n = 2;
  out.push_back(c);
  Instance d;
  d.family = Family::polygon;
  d.l = 5;
  d.m = 3;
  d.n = 2;
  out.push_back(d);
  Instance e;
  e.family = Family::platonic;
  e.l = 3;
  e.m = 3;
  e.n = 2;
  out.push_back(e);
  return out;
}

SolutionDocument random_document(std::mt19937_64& rng) {
  SolutionDocument doc;
  doc.instance.family = Family::polygon;
  doc.instance.l = 5;
  doc.instance.m = 3;
  doc.instance.n = 2;
  doc.solution.instance_id = doc.instance.id();
  const int dim = make_layout(doc.instance).size();
  std::uniform_real_distribution<double> u(-10, 10);
  std::uniform_int_distribution<int> exp10(-300, 300);
  for (int k = 0; k < dim; ++k)
    doc.solution.values.push_back(u(rng) * std::pow(10.0, exp10(rng) / 15));
  doc.solution.values[0] = -0.0;                      // negative zero survives
  doc.solution.values[1] = 5e-324;                    // smallest denormal
  doc.solution.values[2] = 0x1.fffffffffffffp+1023;   // largest finite
  doc.solution.objective = u(rng);
  doc.solution.meta.seed = rng();
  doc.solution.meta.restarts_used = 7;
  doc.solution.meta.polished = true;
  doc.solution.meta.wall_time = 1.25;
  FarkasCertificate cert;
  cert.i = 0;
  cert.j = 1;
  cert.lambdas = {0.25, 0.75, 0, 0, 0.5, 0.5};
  cert.axis = {std::sqrt(0.5), std::sqrt(0.5)};
  cert.offset_gap = u(rng);
  doc.farkas.push_back(cert);
  return doc;
}

}  // namespace

TEST_CASE("solution files round-trip every double bit-exactly") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const SolutionDocument doc = random_document(rng);
    const std::string text = write_solution(doc);
    const SolutionDocument back = read_solution(text);
    REQUIRE(back.solution.values.size() == doc.solution.values.size());
    for (size_t k = 0; k < doc.solution.values.size(); ++k) {
      const double a = doc.solution.values[k], b = back.solution.values[k];
      CHECK(std::memcmp(&a, &b, sizeof a) == 0);  // bit-level, catches -0.0
    }
    CHECK(back.solution.objective == doc.solution.objective);
    CHECK(back.solution.meta.seed == doc.solution.meta.seed);
    CHECK(back.solution.meta.polished == doc.solution.meta.polished);
    CHECK(back.instance.family == doc.instance.family);
    CHECK(back.instance.id() == doc.instance.id());
    REQUIRE(back.farkas.size() == 1);
    CHECK(back.farkas[0].lambdas == doc.farkas[0].lambdas);
    CHECK(back.farkas[0].offset_gap == doc.farkas[0].offset_gap);
    // Serialization is deterministic: a second pass is byte-identical.
    CHECK(write_solution(back) == text);
  }
}

TEST_CASE("solution parser rejects malformed input") {
  CHECK_THROWS_AS(read_solution("not json"), IoError);
  CHECK_THROWS_AS(read_solution("{\"schema\":\"bogus/9\"}"), IoError);
  CHECK_THROWS_AS(read_solution("{\"schema\":\"packing-solution/1\"}"), IoError);
}

TEST_CASE("exported models evaluate identically to the builders") {
  std::mt19937_64 rng(73);
  EvalScratch scratch;
  for (const Instance& inst : sample_instances()) {
    const ConstraintSystem sys = build_system(inst);
    const ExportedModel model = read_model(export_model(inst));
    CHECK(model.maximize == sys.maximize);
    REQUIRE(model.rows.size() == sys.rows.size());
    REQUIRE(static_cast<int>(model.lb.size()) == sys.dim());
    std::vector<double> resid;
    for (int trial = 0; trial < 100; ++trial) {
      const std::vector<double> x = random_point(sys, rng);
      sys.residuals(x, resid, scratch);
      double worst = 0;
      for (size_t r = 0; r < model.rows.size(); ++r)
        worst = std::max(worst, std::abs(eval_expr(model.rows[r].expr, x) - resid[r]));
      worst = std::max(worst,
                       std::abs(eval_expr(model.objective, x) - sys.objective(x, scratch)));
      CHECK(worst < 1e-14);
    }
    for (int i = 0; i < sys.dim(); ++i) {
      CHECK(model.lb[i] == sys.lb[i]);
      CHECK(model.ub[i] == sys.ub[i]);
      CHECK(model.var_names[i] == sys.var_names[i]);
    }
  }
}

TEST_CASE("circle n=2 export matches the documented structure") {
  Instance inst;
  inst.family = Family::circle_square;
  inst.n = 2;
  const ExportedModel model = read_model(export_model(inst));
  int containment = 0, separation = 0, area = 0;
  for (const auto& row : model.rows) {
    if (row.tag == "containment") ++containment;
    if (row.tag == "separation") ++separation;
    if (row.tag == "area") ++area;
  }
  CHECK(containment == 8);
  CHECK(separation == 1);
  CHECK(area == 1);
  CHECK(model.maximize);
}

TEST_CASE("rendering is deterministic and well-formed") {
  SolverConfig cfg;
  cfg.restarts = 4;
  cfg.time_budget = 60;
  for (const Instance& inst : sample_instances()) {
    const SolveReport rep = multistart(inst, cfg);
    REQUIRE(rep.best);
    if (inst.family == Family::platonic) {
      const std::string obj = render_obj(inst, *rep.best);
      CHECK(render_obj(inst, *rep.best) == obj);  // byte-identical
      int meshes = 0;
      for (size_t p = obj.find("o "); p != std::string::npos; p = obj.find("\no ", p + 1))
        ++meshes;
      CHECK(meshes == inst.n + 1);
      CHECK(obj.find("l ") != std::string::npos);  // container wireframe
      CHECK(obj.find("f ") != std::string::npos);  // triangulated bodies
      CHECK_THROWS_AS(render_svg(inst, *rep.best), IoError);
    } else {
      const std::string svg = render_svg(inst, *rep.best);
      CHECK(render_svg(inst, *rep.best) == svg);
      CHECK(svg.rfind("<svg", 0) == 0);
      CHECK(svg.find("</svg>") != std::string::npos);
      // One index label per element.
      int labels = 0;
      for (size_t p = svg.find("<text"); p != std::string::npos; p = svg.find("<text", p + 1))
        ++labels;
      CHECK(labels == inst.n);
      CHECK_THROWS_AS(render_obj(inst, *rep.best), IoError);
    }
  }
}

TEST_CASE("coincident outlines for an identity polygon packing") {
  Instance inst;
  inst.family = Family::polygon;
  inst.l = 4;
  inst.m = 4;
  inst.n = 1;
  Solution sol;
  sol.instance_id = inst.id();
  sol.values.assign(make_layout(inst).size(), 0.0);
  sol.values[0] = 1.0;
  const std::string svg = render_svg(inst, sol);
  // Container and body polygons share all four corner coordinates.
  int polys = 0;
  for (size_t p = svg.find("<polygon"); p != std::string::npos; p = svg.find("<polygon", p + 1))
    ++polys;
  CHECK(polys == 2);
  const size_t first = svg.find("points=\"");
  const size_t second = svg.find("points=\"", first + 1);
  const std::string pts1 = svg.substr(first + 8, svg.find('"', first + 8) - first - 8);
  const std::string pts2 = svg.substr(second + 8, svg.find('"', second + 8) - second - 8);
  CHECK(pts1 == pts2);
}

TEST_CASE("file helpers and missing files") {
  CHECK_THROWS_AS(read_file("/nonexistent/path/xyz"), IoError);
  const std::string path = "/tmp/packing_io_test.txt";
  write_file(path, "hello\n");
  CHECK(read_file(path) == "hello\n");
}
