#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "packing/geometry.hpp"

using namespace packing;

namespace {
constexpr double kPi = std::numbers::pi;

Pose2 random_pose2(std::mt19937_64& rng, double box) {
  std::uniform_real_distribution<double> u(-box, box), a(0, 2 * kPi);
  return {u(rng), u(rng), a(rng)};
}

Pose3 random_pose3(std::mt19937_64& rng, double box) {
  std::uniform_real_distribution<double> u(-box, box), a(0, 2 * kPi);
  return {u(rng), u(rng), u(rng), a(rng), a(rng), a(rng)};
}
}  // namespace

TEST_CASE("regular polygon constants") {
  for (int m = 3; m <= 12; ++m) {
    const RegularPolygonSpec spec = polygon_constants(m);
    CHECK(spec.rho == doctest::Approx(std::cos(kPi / m)).epsilon(1e-15));
    CHECK(spec.phi == doctest::Approx(2 * kPi / m).epsilon(1e-15));
    // Each vertex has unit circumradius and lies on its two adjacent edges.
    for (int j = 0; j < m; ++j) {
      const Vec2 v = polygon_vertex(Pose2{}, spec, j);
      CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-14));
      double on_edges = 0;
      for (int k = 0; k < m; ++k) {
        const Vec2 n{std::sin(k * spec.phi), std::cos(k * spec.phi)};
        const double d = dot(n, v) + spec.rho;  // 0 on edge k, > 0 inside
        CHECK(d >= -1e-12);
        if (std::abs(d) < 1e-12) ++on_edges;
      }
      CHECK(on_edges == 2);
    }
  }
}

TEST_CASE("platonic solid tables") {
  const int expect_v[] = {4, 6, 8, 12, 20};
  const int expect_f[] = {4, 8, 6, 20, 12};
  int idx = 0;
  for (PlatonicKind kind : {PlatonicKind::tetrahedron, PlatonicKind::octahedron,
                            PlatonicKind::cube, PlatonicKind::icosahedron,
                            PlatonicKind::dodecahedron}) {
    const PlatonicSpec& s = platonic_spec(kind);
    CHECK(static_cast<int>(s.vertices.size()) == expect_v[idx]);
    CHECK(static_cast<int>(s.faces.size()) == expect_f[idx]);
    // Euler characteristic V - E + F = 2.
    CHECK(static_cast<int>(s.vertices.size() - s.edges.size() + s.faces.size()) == 2);
    for (const Vec3& v : s.vertices) CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-13));
    // Inward normals: every vertex of face f satisfies n.v = -rho; all other
    // vertices lie strictly inside.
    for (size_t f = 0; f < s.faces.size(); ++f) {
      CHECK(norm(s.normals[f]) == doctest::Approx(1.0).epsilon(1e-13));
      for (int vi : s.faces[f])
        CHECK(dot(s.normals[f], s.vertices[vi]) == doctest::Approx(-s.rho).epsilon(1e-12));
      for (size_t vi = 0; vi < s.vertices.size(); ++vi)
        CHECK(dot(s.normals[f], s.vertices[vi]) >= -s.rho - 1e-12);
    }
    ++idx;
  }
}

TEST_CASE("cube volume and inradius") {
  const PlatonicSpec& cube = platonic_spec(PlatonicKind::cube);
  // Unit circumradius cube has side 2/sqrt(3).
  const double side = 2 / std::sqrt(3.0);
  CHECK(cube.rho == doctest::Approx(side / 2).epsilon(1e-14));
  CHECK(cube.volume == doctest::Approx(side * side * side).epsilon(1e-13));
}

TEST_CASE("rotation is orthogonal and matches its jacobian") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const Pose3 p = random_pose3(rng, 2);
    const Vec3 v{u(rng), u(rng), u(rng)};
    const Vec3 w{u(rng), u(rng), u(rng)};
    CHECK(dot(rotate_zyx(p, v), rotate_zyx(p, w)) == doctest::Approx(dot(v, w)).epsilon(1e-12));

    const auto jac = rotate_zyx_jacobian(p, v);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      Pose3 up = p, dn = p;
      (k == 0 ? up.theta : k == 1 ? up.iota : up.kappa) += h;
      (k == 0 ? dn.theta : k == 1 ? dn.iota : dn.kappa) -= h;
      const Vec3 fd = (1 / (2 * h)) * (rotate_zyx(up, v) - rotate_zyx(dn, v));
      CHECK(norm(fd - jac[k]) < 1e-8);
    }
  }
}

TEST_CASE("sat margin equals center gap for axis-aligned squares") {
  const RegularPolygonSpec sq = polygon_constants(4);
  // Unit-circumradius squares have half-width rho = cos(pi/4).
  // Vertices sit at 45, 135, ... degrees, so theta = 0 is axis-aligned.
  for (double d : {0.0, 0.5, 1.5, 3.0}) {
    const Pose2 a{0, 0, 0};
    const Pose2 b{2 * sq.rho + d, 0, 0};
    CHECK(sat_margin_2d(a, b, sq).margin == doctest::Approx(d).epsilon(1e-12));
  }
}

TEST_CASE("sat margin sign detects overlap for random pairs") {
  const RegularPolygonSpec tri = polygon_constants(3);
  std::mt19937_64 rng(11);
  int disjoint = 0, overlapping = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const Pose2 a = random_pose2(rng, 2);
    const Pose2 b = random_pose2(rng, 2);
    const SatResult2 r = sat_margin_2d(a, b, tri);
    const SatResult2 rev = sat_margin_2d(b, a, tri);
    CHECK(r.margin == doctest::Approx(rev.margin).epsilon(1e-10));
    // Far apart centers guarantee disjoint, coincident centers overlap.
    const double cd = norm(Vec2{a.x - b.x, a.y - b.y});
    if (cd > 2) CHECK(r.margin > 0);
    if (cd < 2 * tri.rho * 0.99) CHECK(r.margin < 0);
    (r.margin > 0 ? disjoint : overlapping)++;
  }
  CHECK(disjoint > 100);
  CHECK(overlapping > 100);
}

TEST_CASE("sat margin is translation invariant along the axis normal") {
  const PlatonicSpec& cube = platonic_spec(PlatonicKind::cube);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const Pose3 a = random_pose3(rng, 1.5);
    const Pose3 b = random_pose3(rng, 1.5);
    const SatResult3 r = sat_margin_3d(a, b, cube);
    Pose3 a2 = a, b2 = b;
    a2.x += 0.7;
    b2.x += 0.7;
    a2.z -= 1.3;
    b2.z -= 1.3;
    CHECK(sat_margin_3d(a2, b2, cube).margin == doctest::Approx(r.margin).epsilon(1e-10));
  }
}

TEST_CASE("sat gradient matches finite differences away from ties") {
  const RegularPolygonSpec pent = polygon_constants(5);
  std::mt19937_64 rng(17);
  const double h = 1e-7;
  int checked = 0;
  for (int trial = 0; trial < 500 && checked < 200; ++trial) {
    const Pose2 a = random_pose2(rng, 2);
    const Pose2 b = random_pose2(rng, 2);
    const SatGrad2 g = sat_margin_grad_2d(a, b, pent);
    // Skip near-degenerate axis ties where the margin is nonsmooth.
    bool smooth = true;
    auto probe = [&](Pose2 pa, Pose2 pb) { return sat_margin_2d(pa, pb, pent); };
    if (std::abs(probe(a, b).margin - g.margin) > 1e-12) smooth = false;
    double fd[6];
    const double* ga[6] = {&g.grad_a[0], &g.grad_a[1], &g.grad_a[2],
                           &g.grad_b[0], &g.grad_b[1], &g.grad_b[2]};
    for (int k = 0; k < 6 && smooth; ++k) {
      Pose2 ua = a, ub = b, da = a, db = b;
      double* fields[6] = {&ua.x, &ua.y, &ua.theta, &ub.x, &ub.y, &ub.theta};
      double* fieldsd[6] = {&da.x, &da.y, &da.theta, &db.x, &db.y, &db.theta};
      *fields[k] += h;
      *fieldsd[k] -= h;
      const SatResult2 up = probe(ua, ub), dn = probe(da, db);
      // A changing active axis across the stencil means a kink; skip.
      if (norm(up.axis - dn.axis) > 1e-6) {
        smooth = false;
        break;
      }
      fd[k] = (up.margin - dn.margin) / (2 * h);
    }
    if (!smooth) continue;
    for (int k = 0; k < 6; ++k) CHECK(std::abs(fd[k] - *ga[k]) < 1e-5);
    ++checked;
  }
  CHECK(checked >= 200);
}

TEST_CASE("halfspaces agree with transformed vertices") {
  const RegularPolygonSpec hex = polygon_constants(6);
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const Pose2 p = random_pose2(rng, 3);
    for (int j = 0; j < 6; ++j) {
      const Halfspace2 hs = polygon_halfspace(p, hex, j);
      CHECK(std::hypot(hs.a, hs.b) == doctest::Approx(1.0).epsilon(1e-13));
      for (int k = 0; k < 6; ++k) {
        const Vec2 v = polygon_vertex(p, hex, k);
        CHECK(hs.a * v.x + hs.b * v.y >= hs.s - 1e-12);
      }
      // The edge's own vertices are tight.
      int tight = 0;
      for (int k = 0; k < 6; ++k) {
        const Vec2 v = polygon_vertex(p, hex, k);
        if (std::abs(hs.a * v.x + hs.b * v.y - hs.s) < 1e-11) ++tight;
      }
      CHECK(tight == 2);
    }
  }
}
