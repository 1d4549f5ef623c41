#include "packing/polish.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "packing/solver.hpp"
#include "packing/verify.hpp"

namespace packing {

namespace {

using BF = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<256, boost::multiprecision::digit_base_2>>;

const BF& bf_pi() {
  static const BF pi = 4 * atan(BF(1));
  return pi;
}

struct BV2 {
  BF x, y;
};
struct BV3 {
  BF x, y, z;
};

BF dot(const BV2& a, const BV2& b) { return a.x * b.x + a.y * b.y; }
BF dot(const BV3& a, const BV3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
BV3 cross(const BV3& a, const BV3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
BF norm(const BV2& a) { return sqrt(BF(dot(a, a))); }
BF norm(const BV3& a) { return sqrt(BF(dot(a, a))); }
BF bmin(const BF& a, const BF& b) { return a < b ? a : b; }
BF bmax(const BF& a, const BF& b) { return a > b ? a : b; }

BV3 rotate_zyx_bf(const BF& th, const BF& io, const BF& ka, const BV3& v) {
  const BF ct = cos(th), st = sin(th);
  const BF ci = cos(io), si = sin(io);
  const BF ck = cos(ka), sk = sin(ka);
  const BF w1y = ck * v.y - sk * v.z;
  const BF w1z = sk * v.y + ck * v.z;
  const BF w2x = ci * v.x + si * w1z;
  const BF w2z = -si * v.x + ci * w1z;
  return {ct * w2x - st * w1y, st * w2x + ct * w1y, w2z};
}

void require_near_feasible(const Instance& instance, const Solution& sol) {
  const VerifyReport pre = verify(instance, sol, 1e-6);
  if (!pre.feasible)
    throw PolishError("polish rejected: input residual " + std::to_string(pre.worst_residual) +
                      " exceeds 1e-6 (" + pre.worst_tag + ")");
}

Solution rounded(const Instance& instance, const std::vector<BF>& values, const Solution& in) {
  Solution out = in;
  out.instance_id = instance.id();
  out.values.resize(values.size());
  for (size_t i = 0; i < values.size(); ++i) out.values[i] = static_cast<double>(values[i]);
  out.meta.polished = true;
  return out;
}

// -------------------------------------------------------------- circles ----

std::pair<Solution, PolishReport> polish_circles_impl(const Instance& instance,
                                                      const Solution& sol) {
  const Layout lay = make_layout(instance);
  const int n = instance.n;
  const std::vector<double>& x = sol.values;
  const BF alpha = lay.container_size == 1 ? BF(x[0]) : BF(1);
  const BF margin = BF("1e-15");

  std::vector<BF> cx(n), cy(n), r(n);
  for (int i = 0; i < n; ++i) {
    const int off = lay.element_offset(i);
    cx[i] = x[off];
    cy[i] = x[off + 1];
    r[i] = x[off + 2];
  }

  auto wall_slack = [&](int i) {
    BF s = cx[i] - r[i];
    s = bmin(s, BF(alpha - cx[i] - r[i]));
    s = bmin(s, BF(cy[i] - r[i]));
    s = bmin(s, BF(2 - alpha - cy[i] - r[i]));
    return s;
  };
  auto pair_gap = [&](int i, int j) {
    const BV2 d{cx[i] - cx[j], cy[i] - cy[j]};
    return norm(d) - r[i] - r[j];
  };

  // Phase 1: maximum uniform radius increase.
  BF slack = wall_slack(0);
  for (int i = 1; i < n; ++i) slack = bmin(slack, wall_slack(i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) slack = bmin(slack, BF(pair_gap(i, j) / 2));
  if (slack < 0)
    throw PolishError("polish rejected: circles require a radius decrease");
  PolishReport report;
  report.margin_consumed = static_cast<double>(slack);
  const BF delta = bmax(BF(0), BF(slack - margin));
  for (int i = 0; i < n; ++i) r[i] += delta;
  report.delta = static_cast<double>(delta);

  // Phase 2: individual increases in order of increasing current radius,
  // ties broken by element index.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return r[a] < r[b]; });
  report.radius_increments.assign(n, 0.0);
  for (int i : order) {
    BF s = wall_slack(i);
    for (int j = 0; j < n; ++j)
      if (j != i) s = bmin(s, pair_gap(i, j));
    const BF inc = bmax(BF(0), BF(s - margin));
    r[i] += inc;
    report.radius_increments[i] = static_cast<double>(inc);
  }

  std::vector<BF> values(x.begin(), x.end());
  for (int i = 0; i < n; ++i) values[lay.element_offset(i) + 2] = r[i];
  Solution out = rounded(instance, values, sol);

  // Double rounding can land a hair on the wrong side; shave the offending
  // radii by ulps until the zero-tolerance verifier accepts.
  for (int round = 0; round < 1000; ++round) {
    const VerifyReport v = verify(instance, out, 0.0);
    if (v.feasible) {
      report.verified = true;
      break;
    }
    const double a = lay.container_size == 1 ? out.values[0] : 1.0;
    for (int i = 0; i < n; ++i) {
      const int oi = lay.element_offset(i);
      double& ri = out.values[oi + 2];
      const double wx = std::min(out.values[oi], a - out.values[oi]);
      const double wy = std::min(out.values[oi + 1], 2 - a - out.values[oi + 1]);
      bool bad = ri > wx || ri > wy;
      for (int j = 0; j < n && !bad; ++j) {
        if (j == i) continue;
        const int oj = lay.element_offset(j);
        const double dx = out.values[oi] - out.values[oj];
        const double dy = out.values[oi + 1] - out.values[oj + 1];
        const double rr = ri + out.values[oj + 2];
        bad = rr * rr > dx * dx + dy * dy;
      }
      if (bad) ri = std::nextafter(ri, 0.0);
    }
  }

  double before = 0, after = 0;
  for (int i = 0; i < n; ++i) {
    before += x[lay.element_offset(i) + 2];
    after += out.values[lay.element_offset(i) + 2];
  }
  // never hand back a worse objective than the input
  if (after < before) {
    out.values = sol.values;
    after = before;
    report.delta = 0;
    report.radius_increments.assign(n, 0.0);
    report.verified = verify(instance, out, 0.0).feasible;
  }
  report.objective_before = before;
  report.objective_after = after;
  out.objective = after;
  return {std::move(out), report};
}

// ---------------------------------------------------------------- bodies ----

struct BodyGeometry {
  bool flat = true;
  int n = 0;
  std::vector<BV3> centers;                      // .z unused in 2D
  std::vector<std::vector<BV3>> verts;           // rotated unit vertex offsets
  std::vector<std::vector<BV3>> axes_own;        // rotated face normals
  std::vector<std::vector<BV3>> edges;           // rotated unique edge dirs (3D)
  std::vector<BV3> outer_normals;
  BF outer_rho;
};

BodyGeometry body_geometry(const Instance& instance, const std::vector<double>& x) {
  const Layout lay = make_layout(instance);
  BodyGeometry g;
  g.n = instance.n;
  g.flat = instance.family == Family::polygon;
  if (g.flat) {
    const int m = instance.m, l = instance.l;
    const BF phi_m = 2 * bf_pi() / m, phi_l = 2 * bf_pi() / l;
    const BF base = BF((m - 1) % 2) / 2;
    g.outer_rho = cos(bf_pi() / l);
    for (int k = 0; k < l; ++k) g.outer_normals.push_back({sin(k * phi_l), cos(k * phi_l), 0});
    for (int i = 0; i < g.n; ++i) {
      const int off = lay.element_offset(i);
      const BF th = x[off + 2];
      g.centers.push_back({BF(x[off]), BF(x[off + 1]), 0});
      std::vector<BV3> vs, ns;
      for (int k = 0; k < m; ++k) {
        const BF dv = th + (k + base) * phi_m;
        vs.push_back({sin(dv), cos(dv), 0});
        const BF dn = th + k * phi_m;
        ns.push_back({sin(dn), cos(dn), 0});
      }
      g.verts.push_back(std::move(vs));
      g.axes_own.push_back(std::move(ns));
    }
  } else {
    const PlatonicSpec& sm = platonic_spec(platonic_from_index(instance.m));
    const PlatonicSpec& sl = platonic_spec(platonic_from_index(instance.l));
    g.outer_rho = sl.rho;
    for (const Vec3& nk : sl.normals) g.outer_normals.push_back({BF(nk.x), BF(nk.y), BF(nk.z)});
    for (int i = 0; i < g.n; ++i) {
      const int off = lay.element_offset(i);
      const BF th = x[off + 3], io = x[off + 4], ka = x[off + 5];
      g.centers.push_back({BF(x[off]), BF(x[off + 1]), BF(x[off + 2])});
      std::vector<BV3> vs, ns, es;
      for (const Vec3& v : sm.vertices) vs.push_back(rotate_zyx_bf(th, io, ka, {BF(v.x), BF(v.y), BF(v.z)}));
      for (const Vec3& v : sm.normals) ns.push_back(rotate_zyx_bf(th, io, ka, {BF(v.x), BF(v.y), BF(v.z)}));
      for (const Vec3& v : sm.edge_dirs) es.push_back(rotate_zyx_bf(th, io, ka, {BF(v.x), BF(v.y), BF(v.z)}));
      g.verts.push_back(std::move(vs));
      g.axes_own.push_back(std::move(ns));
      g.edges.push_back(std::move(es));
    }
  }
  return g;
}

// Separation axes tried for one pair, unit length.
std::vector<BV3> pair_axes(const BodyGeometry& g, int i, int j) {
  std::vector<BV3> axes = g.axes_own[i];
  axes.insert(axes.end(), g.axes_own[j].begin(), g.axes_own[j].end());
  if (!g.flat) {
    for (const BV3& ei : g.edges[i])
      for (const BV3& ej : g.edges[j]) {
        BV3 c = cross(ei, ej);
        const BF nn = norm(c);
        if (nn < 1e-12) continue;
        axes.push_back({c.x / nn, c.y / nn, c.z / nn});
      }
  }
  return axes;
}

std::pair<Solution, PolishReport> polish_bodies_impl(const Instance& instance,
                                                     const Solution& sol) {
  const Layout lay = make_layout(instance);
  const std::vector<double>& x = sol.values;
  const BodyGeometry g = body_geometry(instance, x);
  const int n = g.n;

  PolishReport report;
  report.objective_before = x[0];

  BF margin_scale = 1;
  for (int attempt = 0; attempt < 8; ++attempt, margin_scale *= 8) {
    // Minimum uniform center scale separating every pair: along each axis the
    // projection gap is affine in sigma, so the requirement is closed-form.
    BF sigma = 1;
    bool hopeless = false;
    for (int i = 0; i < n && !hopeless; ++i)
      for (int j = i + 1; j < n && !hopeless; ++j) {
        const BF t = margin_scale * BF("1e-14") *
                     (1 + norm(g.centers[i]) + norm(g.centers[j]));
        BF best = -1;
        for (const BV3& axis : pair_axes(g, i, j))
          for (int dir = 0; dir < 2; ++dir) {
            const BV3 u = dir ? BV3{-axis.x, -axis.y, -axis.z} : axis;
            const BF d = dot(u, g.centers[j]) - dot(u, g.centers[i]);
            if (d <= 0) continue;
            BF hi = dot(u, g.verts[i][0]), lo = dot(u, g.verts[j][0]);
            for (const BV3& v : g.verts[i]) hi = bmax(hi, dot(u, v));
            for (const BV3& v : g.verts[j]) lo = bmin(lo, dot(u, v));
            const BF req = bmax(BF(0), BF((t - (lo - hi)) / d));
            if (best < 0 || req < best) best = req;
          }
        if (best < 0) {
          hopeless = true;
          break;
        }
        sigma = bmax(sigma, best);
      }
    if (hopeless) throw PolishError("polish rejected: no scaling separates some pair");
    // Containment at the input R bounds sigma from below for faces behind the
    // origin; fold those in so R can only shrink.
    const BF r_in = x[0];
    for (int i = 0; i < n; ++i) {
      const BF tc = margin_scale * BF("1e-14") * (1 + norm(g.centers[i]) + r_in);
      for (const BV3& nk : g.outer_normals) {
        const BF nc = dot(nk, g.centers[i]);
        if (nc <= 1e-30) continue;
        for (const BV3& v : g.verts[i]) {
          const BF req = (tc - dot(nk, v) - r_in * g.outer_rho) / nc;
          sigma = bmax(sigma, req);
        }
      }
    }
    if (sigma > 2) throw PolishError("polish rejected: required center scale exceeds 2");

    std::vector<BV3> sc(n);
    for (int i = 0; i < n; ++i)
      sc[i] = {sigma * g.centers[i].x, sigma * g.centers[i].y, sigma * g.centers[i].z};

    // Container radius recomputed from projections of the scaled elements.
    BF needed = 0;
    for (int i = 0; i < n; ++i)
      for (const BV3& nk : g.outer_normals)
        for (const BV3& v : g.verts[i]) {
          const BV3 p{sc[i].x + v.x, sc[i].y + v.y, sc[i].z + v.z};
          needed = bmax(needed, BF(-dot(nk, p) / g.outer_rho));
        }
    const BF r_new = needed * (1 + margin_scale * BF("1e-14"));

    std::vector<BF> values(x.begin(), x.end());
    values[0] = r_new;
    for (int i = 0; i < n; ++i) {
      const int off = lay.element_offset(i);
      values[off] = sc[i].x;
      values[off + 1] = sc[i].y;
      if (!g.flat) values[off + 2] = sc[i].z;
    }
    Solution out = rounded(instance, values, sol);
    out.values[0] = std::nextafter(out.values[0], 2 * out.values[0] + 1);
    {
      ConstraintSystem shell;  // only instance + layout are needed for the sync
      shell.instance = instance;
      shell.layout = lay;
      sync_aux_variables(shell, out.values);
    }
    const VerifyReport v = verify(instance, out, 0.0);
    if (v.feasible || attempt == 7) {
      report.sigma = static_cast<double>(sigma);
      report.objective_after = out.values[0];
      report.verified = v.feasible;
      out.objective = out.values[0];
      return {std::move(out), report};
    }
  }
  throw PolishError("polish failed to reach zero-tolerance feasibility");
}

// --------------------------------------------------------------- ellipse ----

std::pair<Solution, PolishReport> polish_ellipse_impl(const Instance& instance,
                                                      const Solution& sol) {
  const Layout lay = make_layout(instance);
  const int n = instance.n;
  const std::vector<double>& x = sol.values;

  PolishReport report;
  report.objective_before = x[0] * x[1] * static_cast<double>(bf_pi());

  // Center scale clearing every pairwise gap.
  BF sigma = 1;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int oi = lay.element_offset(i), oj = lay.element_offset(j);
      const BV2 d{BF(x[oi]) - BF(x[oj]), BF(x[oi + 1]) - BF(x[oj + 1])};
      const BF dist = norm(d);
      if (dist < BF("1e-30")) throw PolishError("polish rejected: coincident circle centers");
      sigma = bmax(sigma, BF((2 + BF("1e-15")) / dist));
    }
  report.sigma = static_cast<double>(sigma);

  std::vector<double> cxs(n), cys(n);
  for (int i = 0; i < n; ++i) {
    cxs[i] = static_cast<double>(sigma * BF(x[lay.element_offset(i)]));
    cys[i] = static_cast<double>(sigma * BF(x[lay.element_offset(i) + 1]));
  }

  // Smallest uniform axis scale containing every (scaled) circle, judged by
  // the same certificate search the verifier uses.
  auto contained = [&](double tau) {
    for (int i = 0; i < n; ++i)
      if (!slemma_contains(tau * x[0], tau * x[1], cxs[i], cys[i], 1.0)) return false;
    return true;
  };
  double lo = 1 - 1e-9, hi = 1.0;
  while (!contained(hi)) {
    hi *= 1.0001;
    if (hi > 4) throw PolishError("polish rejected: ellipse axis scale exceeds 4");
  }
  if (contained(lo)) hi = lo;
  else
    for (int it = 0; it < 100; ++it) {
      const double mid = (lo + hi) / 2;
      (contained(mid) ? hi : lo) = mid;
    }
  double tau = hi * (1 + 1e-13);

  Solution out = sol;
  out.instance_id = instance.id();
  out.meta.polished = true;
  for (int round = 0; round < 200; ++round) {
    out.values[0] = tau * x[0];
    out.values[1] = tau * x[1];
    for (int i = 0; i < n; ++i) {
      const int off = lay.element_offset(i);
      out.values[off] = cxs[i];
      out.values[off + 1] = cys[i];
      const auto cert = slemma_contains(out.values[0], out.values[1], cxs[i], cys[i], 1.0);
      if (cert) out.values[off + 2] = std::max(1.0, cert->t);
    }
    const VerifyReport v = verify(instance, out, 0.0);
    if (v.feasible) {
      report.verified = true;
      break;
    }
    tau *= 1 + 1e-14;
  }
  out.objective = out.values[0] * out.values[1] * static_cast<double>(bf_pi());
  report.objective_after = out.objective;
  return {std::move(out), report};
}

}  // namespace

std::pair<Solution, PolishReport> polish_circles(const Instance& instance, const Solution& sol) {
  require_near_feasible(instance, sol);
  return polish_circles_impl(instance, sol);
}

std::pair<Solution, PolishReport> polish_bodies(const Instance& instance, const Solution& sol) {
  require_near_feasible(instance, sol);
  return polish_bodies_impl(instance, sol);
}

std::pair<Solution, PolishReport> polish_ellipse(const Instance& instance, const Solution& sol) {
  require_near_feasible(instance, sol);
  return polish_ellipse_impl(instance, sol);
}

std::pair<Solution, PolishReport> polish(const Instance& instance, const Solution& sol) {
  const Layout lay = make_layout(instance);
  if (static_cast<int>(sol.values.size()) != lay.size())
    throw PolishError("solution does not match instance layout");
  switch (instance.family) {
    case Family::circle_square:
    case Family::circle_rect: return polish_circles(instance, sol);
    case Family::circle_ellipse: return polish_ellipse(instance, sol);
    case Family::polygon:
    case Family::platonic: return polish_bodies(instance, sol);
  }
  throw PolishError("unknown family");
}

}  // namespace packing
