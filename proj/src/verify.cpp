#include "packing/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "packing/certify.hpp"

namespace packing {

namespace {

constexpr double kPi = std::numbers::pi;

struct Worst {
  double value = -std::numeric_limits<double>::infinity();
  const char* tag = "none";

  void add(double v, const char* t) {
    if (v > value) {
      value = v;
      tag = t;
    }
  }
};

// Distance from an interior point to the ellipse boundary, by angular
// sampling plus golden-section refinement. Deterministic.
double ellipse_boundary_distance(double a, double b, double x0, double y0) {
  auto d2 = [&](double phi) {
    const double dx = a * std::cos(phi) - x0, dy = b * std::sin(phi) - y0;
    return dx * dx + dy * dy;
  };
  const int samples = 720;
  double best_phi = 0, best = d2(0);
  for (int k = 1; k < samples; ++k) {
    const double phi = 2 * kPi * k / samples;
    const double v = d2(phi);
    if (v < best) {
      best = v;
      best_phi = phi;
    }
  }
  double lo = best_phi - 2 * kPi / samples, hi = best_phi + 2 * kPi / samples;
  const double gr = (std::sqrt(5.0) - 1) / 2;
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  for (int it = 0; it < 90; ++it) {
    if (d2(c) < d2(d)) hi = d;
    else lo = c;
    c = hi - gr * (hi - lo);
    d = lo + gr * (hi - lo);
  }
  return std::sqrt(d2((lo + hi) / 2));
}

}  // namespace

VerifyReport verify(const Instance& instance, const Solution& sol, double tolerance) {
  const Layout lay = make_layout(instance);
  if (static_cast<int>(sol.values.size()) != lay.size())
    throw MalformedSolutionError("solution size does not match instance layout");
  const std::vector<double>& x = sol.values;
  for (double v : x)
    if (!std::isfinite(v)) throw MalformedSolutionError("non-finite value in solution");

  VerifyReport rep;
  Worst worst;
  const int n = instance.n;

  switch (instance.family) {
    case Family::circle_square:
    case Family::circle_rect: {
      const double alpha = lay.container_size == 1 ? x[0] : 1.0;
      double sum = 0, area = 0;
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        const double cx = x[off], cy = x[off + 1], r = x[off + 2];
        sum += r;
        area += r * r;
        worst.add(-r, "radius");
        worst.add(r - cx, "containment");
        worst.add(cx + r - alpha, "containment");
        worst.add(r - cy, "containment");
        worst.add(cy + r - (2 - alpha), "containment");
      }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const int oi = lay.element_offset(i), oj = lay.element_offset(j);
          const double dx = x[oi] - x[oj], dy = x[oi + 1] - x[oj + 1];
          const double rr = x[oi + 2] + x[oj + 2];
          worst.add(rr * rr - dx * dx - dy * dy, "separation");
        }
      if (lay.container_size == 1) {
        worst.add(-alpha, "bounds");
        worst.add(alpha - 2, "bounds");
      }
      rep.objective = sum;
      rep.area_cut_ok = area <= 1 / kPi + tolerance;
      break;
    }
    case Family::circle_ellipse: {
      const double a = x[0], b = x[1];
      worst.add(b - a, "symmetry");
      worst.add(-b, "bounds");
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        const double dist = ellipse_boundary_distance(a, b, x[off], x[off + 1]);
        const double inside =
            (x[off] * x[off]) / (a * a) + (x[off + 1] * x[off + 1]) / (b * b) <= 1;
        double resid = inside ? 1 - dist : 1 + dist;
        if (slemma_contains(a, b, x[off], x[off + 1], 1.0))
          resid = std::min(resid, 0.0);
        else
          resid = std::max(resid, std::numeric_limits<double>::min());
        worst.add(resid, "containment");
      }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const int oi = lay.element_offset(i), oj = lay.element_offset(j);
          const double dx = x[oi] - x[oj], dy = x[oi + 1] - x[oj + 1];
          worst.add(4 - dx * dx - dy * dy, "separation");
        }
      rep.objective = kPi * a * b;
      break;
    }
    case Family::polygon: {
      const RegularPolygonSpec sm = polygon_constants(instance.m);
      const RegularPolygonSpec sl = polygon_constants(instance.l);
      const double R = x[0];
      worst.add(-R, "bounds");
      for (int i = 0; i < n; ++i) {
        Pose2 p{x[lay.element_offset(i)], x[lay.element_offset(i) + 1],
                x[lay.element_offset(i) + 2]};
        for (int j = 0; j < instance.m; ++j) {
          const Vec2 v = polygon_vertex(p, sm, j);
          for (int k = 0; k < instance.l; ++k) {
            const Vec2 nk{std::sin(k * sl.phi), std::cos(k * sl.phi)};
            worst.add(-(R * sl.rho + dot(nk, v)), "containment");
          }
        }
      }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          Pose2 pi{x[lay.element_offset(i)], x[lay.element_offset(i) + 1],
                   x[lay.element_offset(i) + 2]};
          Pose2 pj{x[lay.element_offset(j)], x[lay.element_offset(j) + 1],
                   x[lay.element_offset(j) + 2]};
          worst.add(-sat_margin_2d(pi, pj, sm).margin, "separation");
        }
      rep.objective = R;
      break;
    }
    case Family::platonic: {
      const PlatonicSpec& sm = platonic_spec(platonic_from_index(instance.m));
      const PlatonicSpec& sl = platonic_spec(platonic_from_index(instance.l));
      const double R = x[0];
      worst.add(-R, "bounds");
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        const Pose3 p{x[off], x[off + 1], x[off + 2], x[off + 3], x[off + 4], x[off + 5]};
        for (size_t j = 0; j < sm.vertices.size(); ++j) {
          const Vec3 v = solid_vertex(p, sm, static_cast<int>(j));
          for (const Vec3& nk : sl.normals) worst.add(-(R * sl.rho + dot(nk, v)), "containment");
        }
      }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const int oi = lay.element_offset(i), oj = lay.element_offset(j);
          const Pose3 pi{x[oi], x[oi + 1], x[oi + 2], x[oi + 3], x[oi + 4], x[oi + 5]};
          const Pose3 pj{x[oj], x[oj + 1], x[oj + 2], x[oj + 3], x[oj + 4], x[oj + 5]};
          worst.add(-sat_margin_3d(pi, pj, sm).margin, "separation");
        }
      rep.objective = R;
      break;
    }
  }

  rep.worst_residual = worst.value;
  rep.worst_tag = worst.tag;
  rep.feasible = worst.value <= tolerance;
  if (auto entry = registry_lookup(instance.family, instance.l, instance.m, instance.n)) {
    const double ours = instance.family == Family::circle_ellipse ? rep.objective / kPi
                                                                  : rep.objective;
    rep.registry_delta = ours - entry->value;
  }
  return rep;
}

const std::vector<RegistryEntry>& registry() {
  static const std::vector<RegistryEntry> table = {
      {Family::circle_square, 0, 0, 32, 2.93957, "Table 1"},
      {Family::circle_rect, 0, 0, 26, 2.63930, "Table 1"},
      {Family::circle_rect, 0, 0, 27, 2.69015, "Table 1"},
      {Family::polygon, 4, 3, 12, 3.13403, "Table 2"},
      {Family::polygon, 5, 3, 6, 2.05332, "Table 2"},
      {Family::polygon, 5, 3, 10, 2.67560, "Table 2"},
      {Family::polygon, 5, 3, 11, 2.75788, "Table 2"},
      {Family::polygon, 5, 3, 12, 2.90916, "Table 2"},
      {Family::polygon, 5, 3, 13, 2.97298, "Table 2"},
      {Family::polygon, 5, 3, 14, 3.07677, "Table 2"},
      {Family::polygon, 5, 4, 9, 3.24086, "Table 2"},
      {Family::polygon, 5, 4, 10, 3.36024, "Table 2"},
      {Family::polygon, 5, 4, 11, 3.47760, "Table 2"},
      {Family::polygon, 5, 4, 12, 3.57255, "Table 2"},
      {Family::polygon, 5, 4, 13, 3.75495, "Table 2"},
      {Family::polygon, 6, 3, 10, 2.59297, "Table 2"},
      {Family::polygon, 6, 3, 12, 2.81217, "Table 2"},
      {Family::polygon, 6, 3, 13, 2.88480, "Table 2"},
      {Family::polygon, 6, 6, 11, 3.92451, "Table 2"},
      {Family::polygon, 6, 6, 12, 3.94165, "Table 2"},
      {Family::polygon, 6, 6, 14, 4.26900, "Table 2"},
      {Family::polygon, 6, 6, 15, 4.44728, "Table 2"},
      {Family::polygon, 6, 6, 16, 4.52788, "Table 2"},
      {Family::polygon, 6, 6, 17, 4.61362, "Table 2"},
      {Family::polygon, 6, 6, 23, 5.40001, "Table 2"},
      {Family::platonic, 3, 3, 11, 2.89445, "Table 4"},
      {Family::circle_ellipse, 0, 0, 9, 12.2708, "Section 5.4 (area / pi)"},
      {Family::circle_ellipse, 0, 0, 15, 19.76329049, "Section 5.4 (area / pi)"},
  };
  return table;
}

std::optional<RegistryEntry> registry_lookup(Family family, int l, int m, int n) {
  const bool keyed_on_n_only =
      family == Family::circle_square || family == Family::circle_rect ||
      family == Family::circle_ellipse;
  for (const RegistryEntry& e : registry())
    if (e.family == family && e.n == n && (keyed_on_n_only || (e.l == l && e.m == m)))
      return e;
  return std::nullopt;
}

std::string registry_to_text(const std::vector<RegistryEntry>& entries) {
  std::ostringstream os;
  os << "# family l m n value source\n";
  for (const RegistryEntry& e : entries) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    os << family_name(e.family) << ' ' << e.l << ' ' << e.m << ' ' << e.n << ' ' << buf << ' '
       << e.source << '\n';
  }
  return os.str();
}

std::vector<RegistryEntry> registry_from_text(const std::string& text) {
  std::vector<RegistryEntry> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string fam;
    RegistryEntry e;
    ls >> fam >> e.l >> e.m >> e.n >> e.value;
    std::getline(ls, e.source);
    if (!e.source.empty() && e.source.front() == ' ') e.source.erase(0, 1);
    const auto f = family_from_name(fam);
    if (!f) throw std::runtime_error("unknown family in registry: " + fam);
    e.family = *f;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace packing
