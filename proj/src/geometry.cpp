#include "packing/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace packing {

namespace {
constexpr double kPi = std::numbers::pi;
}

double norm(Vec2 a) { return std::hypot(a.x, a.y); }
double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

RegularPolygonSpec RegularPolygonSpec::make(int m) {
  if (m < 3) throw InvalidShapeError("regular polygon needs m >= 3, got " + std::to_string(m));
  RegularPolygonSpec spec;
  spec.m = m;
  spec.rho = std::cos(kPi / m);
  spec.phi = 2 * kPi / m;
  spec.delta.resize(m);
  const double shift = ((m - 1) % 2) / 2.0;
  for (int j = 0; j < m; ++j) spec.delta[j] = (j + shift) * spec.phi;
  return spec;
}

RegularPolygonSpec polygon_constants(int m) { return RegularPolygonSpec::make(m); }

const char* platonic_name(PlatonicKind kind) {
  switch (kind) {
    case PlatonicKind::tetrahedron: return "tetrahedron";
    case PlatonicKind::octahedron: return "octahedron";
    case PlatonicKind::cube: return "cube";
    case PlatonicKind::icosahedron: return "icosahedron";
    case PlatonicKind::dodecahedron: return "dodecahedron";
  }
  throw InvalidShapeError("unknown platonic kind");
}

PlatonicKind platonic_from_index(int index) {
  if (index < 1 || index > 5) throw InvalidShapeError("platonic type index must be 1..5");
  return static_cast<PlatonicKind>(index);
}

namespace {

std::vector<Vec3> base_vertices(PlatonicKind kind) {
  std::vector<Vec3> v;
  const double gold = (1 + std::sqrt(5.0)) / 2;
  switch (kind) {
    case PlatonicKind::tetrahedron:
      v = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
      break;
    case PlatonicKind::octahedron:
      v = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
      break;
    case PlatonicKind::cube:
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          for (int sz : {-1, 1}) v.push_back({double(sx), double(sy), double(sz)});
      break;
    case PlatonicKind::icosahedron:
      for (int s1 : {-1, 1})
        for (int s2 : {-1, 1}) {
          v.push_back({0, double(s1), s2 * gold});
          v.push_back({double(s1), s2 * gold, 0});
          v.push_back({s1 * gold, 0, double(s2)});
        }
      break;
    case PlatonicKind::dodecahedron:
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          for (int sz : {-1, 1}) v.push_back({double(sx), double(sy), double(sz)});
      for (int s1 : {-1, 1})
        for (int s2 : {-1, 1}) {
          v.push_back({0, s1 / gold, s2 * gold});
          v.push_back({s1 / gold, s2 * gold, 0});
          v.push_back({s1 * gold, 0, s2 / gold});
        }
      break;
  }
  for (auto& p : v) {
    const double r = norm(p);
    p = (1.0 / r) * p;
  }
  return v;
}

PlatonicSpec build_spec(PlatonicKind kind) {
  PlatonicSpec spec;
  spec.kind = kind;
  spec.vertices = base_vertices(kind);
  const auto& verts = spec.vertices;
  const int nv = static_cast<int>(verts.size());
  const double plane_tol = 1e-9;

  // Enumerate supporting planes through vertex triples; each hull face shows
  // up as a plane with all vertices on one side.
  std::vector<std::pair<Vec3, double>> planes;  // outward normal, offset
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j)
      for (int k = j + 1; k < nv; ++k) {
        Vec3 n = cross(verts[j] - verts[i], verts[k] - verts[i]);
        const double len = norm(n);
        if (len < 1e-12) continue;
        n = (1.0 / len) * n;
        double d = dot(n, verts[i]);
        if (d < 0) {
          n = -1.0 * n;
          d = -d;
        }
        if (d < plane_tol) continue;  // plane through the center is not a face
        bool supporting = true;
        for (int t = 0; t < nv && supporting; ++t)
          if (dot(n, verts[t]) > d + plane_tol) supporting = false;
        if (!supporting) continue;
        bool dup = false;
        for (const auto& [pn, pd] : planes)
          if (norm(pn - n) < 1e-9 && std::abs(pd - d) < 1e-9) dup = true;
        if (!dup) planes.emplace_back(n, d);
      }

  spec.rho = planes.front().second;
  for (const auto& [n, d] : planes) {
    // Vertices lying on the plane, ordered counterclockwise seen from outside.
    std::vector<int> on_face;
    for (int t = 0; t < nv; ++t)
      if (std::abs(dot(n, verts[t]) - d) < plane_tol) on_face.push_back(t);
    Vec3 centroid{0, 0, 0};
    for (int t : on_face) centroid = centroid + verts[t];
    centroid = (1.0 / on_face.size()) * centroid;
    Vec3 u = verts[on_face[0]] - centroid;
    u = (1.0 / norm(u)) * u;
    Vec3 w = cross(n, u);
    std::sort(on_face.begin(), on_face.end(), [&](int p, int q) {
      const Vec3 a = verts[p] - centroid, b = verts[q] - centroid;
      return std::atan2(dot(a, w), dot(a, u)) < std::atan2(dot(b, w), dot(b, u));
    });
    spec.faces.push_back(on_face);
    spec.normals.push_back(-1.0 * n);  // inward
  }

  // Edges from consecutive cycle pairs, deduped.
  std::map<std::pair<int, int>, bool> seen;
  for (const auto& face : spec.faces) {
    const int fs = static_cast<int>(face.size());
    for (int t = 0; t < fs; ++t) {
      int a = face[t], b = face[(t + 1) % fs];
      if (a > b) std::swap(a, b);
      if (!seen.count({a, b})) {
        seen[{a, b}] = true;
        spec.edges.push_back({a, b});
      }
    }
  }
  for (const auto& [a, b] : spec.edges) {
    Vec3 dir = verts[b] - verts[a];
    dir = (1.0 / norm(dir)) * dir;
    if (dir.x < 0 || (dir.x == 0 && (dir.y < 0 || (dir.y == 0 && dir.z < 0)))) dir = -1.0 * dir;
    bool dup = false;
    for (const auto& e : spec.edge_dirs)
      if (norm(e - dir) < 1e-9) dup = true;
    if (!dup) spec.edge_dirs.push_back(dir);
  }

  // Divergence-theorem volume over outward-oriented face fans.
  double vol = 0;
  for (const auto& face : spec.faces) {
    for (size_t t = 1; t + 1 < face.size(); ++t) {
      vol += dot(verts[face[0]], cross(verts[face[t]], verts[face[t + 1]])) / 6.0;
    }
  }
  spec.volume = vol;

  for (const auto& v : verts)
    if (std::abs(norm(v) - 1.0) > 1e-15) throw InvalidShapeError("vertex not on unit sphere");
  for (size_t f = 0; f < spec.faces.size(); ++f)
    for (int t : spec.faces[f])
      if (std::abs(dot(spec.normals[f], verts[t]) + spec.rho) > 1e-14)
        throw InvalidShapeError("face not coplanar at inradius");
  return spec;
}

}  // namespace

const PlatonicSpec& PlatonicSpec::get(PlatonicKind kind) {
  static const PlatonicSpec tet = build_spec(PlatonicKind::tetrahedron);
  static const PlatonicSpec oct = build_spec(PlatonicKind::octahedron);
  static const PlatonicSpec cub = build_spec(PlatonicKind::cube);
  static const PlatonicSpec ico = build_spec(PlatonicKind::icosahedron);
  static const PlatonicSpec dod = build_spec(PlatonicKind::dodecahedron);
  switch (kind) {
    case PlatonicKind::tetrahedron: return tet;
    case PlatonicKind::octahedron: return oct;
    case PlatonicKind::cube: return cub;
    case PlatonicKind::icosahedron: return ico;
    case PlatonicKind::dodecahedron: return dod;
  }
  throw InvalidShapeError("unknown platonic kind");
}

const PlatonicSpec& platonic_spec(PlatonicKind kind) { return PlatonicSpec::get(kind); }

Vec3 rotate_zyx(const Pose3& p, Vec3 v) {
  const double ck = std::cos(p.kappa), sk = std::sin(p.kappa);
  const double ci = std::cos(p.iota), si = std::sin(p.iota);
  const double ct = std::cos(p.theta), st = std::sin(p.theta);
  const Vec3 w1{v.x, ck * v.y - sk * v.z, sk * v.y + ck * v.z};
  const Vec3 w2{ci * w1.x + si * w1.z, w1.y, -si * w1.x + ci * w1.z};
  return {ct * w2.x - st * w2.y, st * w2.x + ct * w2.y, w2.z};
}

std::array<Vec3, 3> rotate_zyx_jacobian(const Pose3& p, Vec3 v) {
  const double ck = std::cos(p.kappa), sk = std::sin(p.kappa);
  const double ci = std::cos(p.iota), si = std::sin(p.iota);
  const double ct = std::cos(p.theta), st = std::sin(p.theta);
  const Vec3 w1{v.x, ck * v.y - sk * v.z, sk * v.y + ck * v.z};
  const Vec3 w2{ci * w1.x + si * w1.z, w1.y, -si * w1.x + ci * w1.z};
  // d/dtheta: dRz * w2
  const Vec3 dt{-st * w2.x - ct * w2.y, ct * w2.x - st * w2.y, 0};
  // d/diota: Rz * dRy * w1
  const Vec3 dw2{-si * w1.x + ci * w1.z, 0, -ci * w1.x - si * w1.z};
  const Vec3 di{ct * dw2.x - st * dw2.y, st * dw2.x + ct * dw2.y, dw2.z};
  // d/dkappa: Rz * Ry * dRx * v
  const Vec3 dw1{0, -sk * v.y - ck * v.z, ck * v.y - sk * v.z};
  const Vec3 dw2k{ci * dw1.x + si * dw1.z, dw1.y, -si * dw1.x + ci * dw1.z};
  const Vec3 dk{ct * dw2k.x - st * dw2k.y, st * dw2k.x + ct * dw2k.y, dw2k.z};
  return {dt, di, dk};
}

Vec2 polygon_vertex(const Pose2& p, const RegularPolygonSpec& spec, int j) {
  const double ang = p.theta + spec.delta[j];
  return {p.x + std::sin(ang), p.y + std::cos(ang)};
}

Vec3 solid_vertex(const Pose3& p, const PlatonicSpec& spec, int j) {
  return Vec3{p.x, p.y, p.z} + rotate_zyx(p, spec.vertices[j]);
}

Halfspace2 polygon_halfspace(const Pose2& p, const RegularPolygonSpec& spec, int j) {
  const double ang = p.theta + j * spec.phi;
  Halfspace2 h;
  h.a = std::sin(ang);
  h.b = std::cos(ang);
  h.s = h.a * p.x + h.b * p.y - spec.rho;
  return h;
}

Halfspace3 solid_halfspace(const Pose3& p, const PlatonicSpec& spec, int f) {
  const Vec3 n = rotate_zyx(p, spec.normals[f]);
  Halfspace3 h;
  h.a = n.x;
  h.b = n.y;
  h.c = n.z;
  h.e = h.a * p.x + h.b * p.y + h.c * p.z - spec.rho;
  return h;
}

namespace {

struct ProjRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  int arg_lo = -1, arg_hi = -1;
};

template <class VecT, class VertFn>
ProjRange project(const VecT& axis, int count, VertFn vertex) {
  ProjRange r;
  for (int j = 0; j < count; ++j) {
    const double p = dot(axis, vertex(j));
    if (p < r.lo) {
      r.lo = p;
      r.arg_lo = j;
    }
    if (p > r.hi) {
      r.hi = p;
      r.arg_hi = j;
    }
  }
  return r;
}

// Which body sourced the winning axis, and how.
struct AxisRecord2 {
  int source = 0;  // 0: normal of a, 1: normal of b
  int index = 0;   // edge index
  double sign = 1; // orientation so that b is on the positive side
};

struct AxisRecord3 {
  int source = 0;  // 0: face normal of a, 1: face normal of b, 2: edge cross
  int index_a = 0, index_b = 0;
  double sign = 1;
};

}  // namespace

SatResult2 sat_margin_2d(const Pose2& pa, const Pose2& pb, const RegularPolygonSpec& spec) {
  SatResult2 best;
  best.margin = -std::numeric_limits<double>::infinity();
  const int m = spec.m;
  auto va = [&](int j) { return polygon_vertex(pa, spec, j); };
  auto vb = [&](int j) { return polygon_vertex(pb, spec, j); };
  for (int s = 0; s < 2; ++s) {
    const double base = (s == 0) ? pa.theta : pb.theta;
    for (int k = 0; k < m; ++k) {
      const double ang = base + k * spec.phi;
      const Vec2 u{std::sin(ang), std::cos(ang)};
      const ProjRange ra = project(u, m, va);
      const ProjRange rb = project(u, m, vb);
      const double gap_fwd = rb.lo - ra.hi;  // b above a
      const double gap_rev = ra.lo - rb.hi;  // a above b
      if (gap_fwd > best.margin) best = {gap_fwd, u};
      if (gap_rev > best.margin) best = {gap_rev, -1.0 * u};
    }
  }
  return best;
}

SatResult3 sat_margin_3d(const Pose3& pa, const Pose3& pb, const PlatonicSpec& spec) {
  SatResult3 best;
  best.margin = -std::numeric_limits<double>::infinity();
  const int nv = static_cast<int>(spec.vertices.size());
  auto va = [&](int j) { return solid_vertex(pa, spec, j); };
  auto vb = [&](int j) { return solid_vertex(pb, spec, j); };
  auto consider = [&](Vec3 u) {
    const ProjRange ra = project(u, nv, va);
    const ProjRange rb = project(u, nv, vb);
    const double gap_fwd = rb.lo - ra.hi;
    const double gap_rev = ra.lo - rb.hi;
    if (gap_fwd > best.margin) best = {gap_fwd, u};
    if (gap_rev > best.margin) best = {gap_rev, -1.0 * u};
  };
  for (const Vec3& n : spec.normals) consider(rotate_zyx(pa, n));
  for (const Vec3& n : spec.normals) consider(rotate_zyx(pb, n));
  for (const Vec3& da : spec.edge_dirs)
    for (const Vec3& db : spec.edge_dirs) {
      const Vec3 c = cross(rotate_zyx(pa, da), rotate_zyx(pb, db));
      const double len = norm(c);
      if (len < 1e-12) continue;  // parallel edges are covered by face normals
      consider((1.0 / len) * c);
    }
  return best;
}

SatGrad2 sat_margin_grad_2d(const Pose2& pa, const Pose2& pb, const RegularPolygonSpec& spec) {
  const int m = spec.m;
  auto va = [&](int j) { return polygon_vertex(pa, spec, j); };
  auto vb = [&](int j) { return polygon_vertex(pb, spec, j); };
  double best_margin = -std::numeric_limits<double>::infinity();
  AxisRecord2 rec;
  for (int s = 0; s < 2; ++s) {
    const double base = (s == 0) ? pa.theta : pb.theta;
    for (int k = 0; k < m; ++k) {
      const double ang = base + k * spec.phi;
      const Vec2 u{std::sin(ang), std::cos(ang)};
      const ProjRange ra = project(u, m, va);
      const ProjRange rb = project(u, m, vb);
      if (rb.lo - ra.hi > best_margin) {
        best_margin = rb.lo - ra.hi;
        rec = {s, k, 1.0};
      }
      if (ra.lo - rb.hi > best_margin) {
        best_margin = ra.lo - rb.hi;
        rec = {s, k, -1.0};
      }
    }
  }
  // Re-evaluate at the winning axis with the active vertices.
  const double base = (rec.source == 0) ? pa.theta : pb.theta;
  const double ang = base + rec.index * spec.phi;
  const Vec2 w = rec.sign * Vec2{std::sin(ang), std::cos(ang)};
  const ProjRange ra = project(w, m, va);
  const ProjRange rb = project(w, m, vb);
  const int ja = ra.arg_hi, jb = rb.arg_lo;

  SatGrad2 out;
  out.margin = rb.lo - ra.hi;
  out.axis = w;
  const double aa = pa.theta + spec.delta[ja];
  const double ab = pb.theta + spec.delta[jb];
  const Vec2 doa{std::cos(aa), -std::sin(aa)};  // d vertex offset / d theta
  const Vec2 dob{std::cos(ab), -std::sin(ab)};
  out.grad_a = {-w.x, -w.y, -dot(w, doa)};
  out.grad_b = {w.x, w.y, dot(w, dob)};
  if (rec.source == 0 || rec.source == 1) {
    const Vec2 dw = rec.sign * Vec2{std::cos(ang), -std::sin(ang)};
    const Vec2 diff = vb(jb) - va(ja);
    const double extra = dot(dw, diff);
    if (rec.source == 0)
      out.grad_a[2] += extra;
    else
      out.grad_b[2] += extra;
  }
  return out;
}

SatGrad3 sat_margin_grad_3d(const Pose3& pa, const Pose3& pb, const PlatonicSpec& spec) {
  const int nv = static_cast<int>(spec.vertices.size());
  auto va = [&](int j) { return solid_vertex(pa, spec, j); };
  auto vb = [&](int j) { return solid_vertex(pb, spec, j); };
  double best_margin = -std::numeric_limits<double>::infinity();
  AxisRecord3 rec;
  auto consider = [&](Vec3 u, int source, int ia, int ib) {
    const ProjRange ra = project(u, nv, va);
    const ProjRange rb = project(u, nv, vb);
    if (rb.lo - ra.hi > best_margin) {
      best_margin = rb.lo - ra.hi;
      rec = {source, ia, ib, 1.0};
    }
    if (ra.lo - rb.hi > best_margin) {
      best_margin = ra.lo - rb.hi;
      rec = {source, ia, ib, -1.0};
    }
  };
  const int nf = static_cast<int>(spec.normals.size());
  const int ne = static_cast<int>(spec.edge_dirs.size());
  for (int f = 0; f < nf; ++f) consider(rotate_zyx(pa, spec.normals[f]), 0, f, 0);
  for (int f = 0; f < nf; ++f) consider(rotate_zyx(pb, spec.normals[f]), 1, 0, f);
  for (int i = 0; i < ne; ++i)
    for (int j = 0; j < ne; ++j) {
      const Vec3 c = cross(rotate_zyx(pa, spec.edge_dirs[i]), rotate_zyx(pb, spec.edge_dirs[j]));
      const double len = norm(c);
      if (len < 1e-12) continue;
      consider((1.0 / len) * c, 2, i, j);
    }

  // Rebuild the winning axis and differentiate it.
  Vec3 w;
  std::array<Vec3, 3> dw_a{};  // d axis / d angles of pose a
  std::array<Vec3, 3> dw_b{};
  if (rec.source == 0) {
    w = rec.sign * rotate_zyx(pa, spec.normals[rec.index_a]);
    const auto jac = rotate_zyx_jacobian(pa, spec.normals[rec.index_a]);
    for (int t = 0; t < 3; ++t) dw_a[t] = rec.sign * jac[t];
  } else if (rec.source == 1) {
    w = rec.sign * rotate_zyx(pb, spec.normals[rec.index_b]);
    const auto jac = rotate_zyx_jacobian(pb, spec.normals[rec.index_b]);
    for (int t = 0; t < 3; ++t) dw_b[t] = rec.sign * jac[t];
  } else {
    const Vec3 ea = rotate_zyx(pa, spec.edge_dirs[rec.index_a]);
    const Vec3 eb = rotate_zyx(pb, spec.edge_dirs[rec.index_b]);
    const Vec3 raw = cross(ea, eb);
    const double len = norm(raw);
    const Vec3 unit = (1.0 / len) * raw;
    w = rec.sign * unit;
    const auto jac_a = rotate_zyx_jacobian(pa, spec.edge_dirs[rec.index_a]);
    const auto jac_b = rotate_zyx_jacobian(pb, spec.edge_dirs[rec.index_b]);
    for (int t = 0; t < 3; ++t) {
      const Vec3 draw_a = cross(jac_a[t], eb);
      const Vec3 draw_b = cross(ea, jac_b[t]);
      dw_a[t] = rec.sign * (1.0 / len) * (draw_a - dot(unit, draw_a) * unit);
      dw_b[t] = rec.sign * (1.0 / len) * (draw_b - dot(unit, draw_b) * unit);
    }
  }

  const ProjRange ra = project(w, nv, va);
  const ProjRange rb = project(w, nv, vb);
  const int ja = ra.arg_hi, jb = rb.arg_lo;
  const Vec3 pa_pt = va(ja), pb_pt = vb(jb);
  const Vec3 diff = pb_pt - pa_pt;
  const auto jva = rotate_zyx_jacobian(pa, spec.vertices[ja]);
  const auto jvb = rotate_zyx_jacobian(pb, spec.vertices[jb]);

  SatGrad3 out;
  out.margin = rb.lo - ra.hi;
  out.axis = w;
  out.grad_a = {-w.x, -w.y, -w.z, dot(dw_a[0], diff) - dot(w, jva[0]),
                dot(dw_a[1], diff) - dot(w, jva[1]), dot(dw_a[2], diff) - dot(w, jva[2])};
  out.grad_b = {w.x, w.y, w.z, dot(dw_b[0], diff) + dot(w, jvb[0]),
                dot(dw_b[1], diff) + dot(w, jvb[1]), dot(dw_b[2], diff) + dot(w, jvb[2])};
  return out;
}

}  // namespace packing
