#include "packing/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace packing {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// The problem a local solve actually minimizes: a subset of the model rows,
/// optionally extended by per-pair SAT-margin inequalities that stand in for
/// the Farkas separation block.
struct WorkProblem {
  const ConstraintSystem* sys = nullptr;
  std::vector<int> expr_rows;
  bool sat_pairs = false;
  double sat_eps = 0;
  RegularPolygonSpec poly;            // polygon families
  const PlatonicSpec* solid = nullptr;  // platonic families

  int num_pairs() const { return sat_pairs ? sys->layout.num_pairs : 0; }
  size_t size() const { return expr_rows.size() + num_pairs(); }
  bool equality(size_t k) const {
    return k < expr_rows.size() && sys->rows[expr_rows[k]].equality;
  }

  void residuals(std::span<const double> x, std::vector<double>& out,
                 EvalScratch& scratch) const {
    out.resize(size());
    for (size_t k = 0; k < expr_rows.size(); ++k)
      out[k] = sys->rows[expr_rows[k]].tape.eval(x, scratch.stack);
    if (!sat_pairs) return;
    const int n = sys->layout.n;
    size_t k = expr_rows.size();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double margin;
        if (solid)
          margin = sat_margin_3d(sys->pose3(x, i), sys->pose3(x, j), *solid).margin;
        else
          margin = sat_margin_2d(sys->pose2(x, i), sys->pose2(x, j), poly).margin;
        out[k++] = sat_eps - margin;
      }
  }

  void add_weighted(std::span<const double> x, std::span<const double> w,
                    std::vector<double>& grad, EvalScratch& scratch) const {
    for (size_t k = 0; k < expr_rows.size(); ++k) {
      if (w[k] == 0) continue;
      for (const auto& [var, tape] : sys->rows[expr_rows[k]].grad)
        grad[var] += w[k] * tape.eval(x, scratch.stack);
    }
    if (!sat_pairs) return;
    const int n = sys->layout.n;
    size_t k = expr_rows.size();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j, ++k) {
        if (w[k] == 0) continue;
        const int oi = sys->layout.element_offset(i), oj = sys->layout.element_offset(j);
        if (solid) {
          const SatGrad3 g = sat_margin_grad_3d(sys->pose3(x, i), sys->pose3(x, j), *solid);
          for (int c = 0; c < 6; ++c) {
            grad[oi + c] -= w[k] * g.grad_a[c];
            grad[oj + c] -= w[k] * g.grad_b[c];
          }
        } else {
          const SatGrad2 g = sat_margin_grad_2d(sys->pose2(x, i), sys->pose2(x, j), poly);
          for (int c = 0; c < 3; ++c) {
            grad[oi + c] -= w[k] * g.grad_a[c];
            grad[oj + c] -= w[k] * g.grad_b[c];
          }
        }
      }
  }
};

WorkProblem make_work(const ConstraintSystem& sys, SolveMode mode) {
  WorkProblem wp;
  wp.sys = &sys;
  const bool drop = mode == SolveMode::sat_penalty && sys.instance.is_body();
  for (size_t k = 0; k < sys.rows.size(); ++k) {
    const Tag tag = sys.rows[k].tag;
    if (drop && (tag == Tag::separation || tag == Tag::farkas_sum || tag == Tag::halfspace))
      continue;
    wp.expr_rows.push_back(static_cast<int>(k));
  }
  if (drop) {
    wp.sat_pairs = true;
    wp.sat_eps = sys.instance.epsilon;
    if (sys.instance.family == Family::polygon)
      wp.poly = polygon_constants(sys.instance.m);
    else
      wp.solid = &platonic_spec(platonic_from_index(sys.instance.m));
  }
  return wp;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

struct AlState {
  const WorkProblem* wp;
  const std::vector<double>* lb;
  const std::vector<double>* ub;
  double obj_sign = 1;  // internal minimization
  std::vector<double> mult;  // lambda (ineq, >= 0) or mu (eq, free)
  double rho = 10;
  EvalScratch scratch;
  std::vector<double> res, w;

  double value(std::span<const double> x) {
    double f = obj_sign * wp->sys->objective(x, scratch);
    wp->residuals(x, res, scratch);
    for (size_t k = 0; k < res.size(); ++k) {
      if (wp->equality(k)) {
        f += mult[k] * res[k] + 0.5 * rho * res[k] * res[k];
      } else {
        const double t = mult[k] + rho * res[k];
        if (t > 0) f += (t * t - mult[k] * mult[k]) / (2 * rho);
        else f -= mult[k] * mult[k] / (2 * rho);
      }
    }
    return f;
  }

  void gradient(std::span<const double> x, std::vector<double>& grad) {
    wp->sys->objective_gradient(x, grad, scratch);
    if (obj_sign < 0)
      for (double& g : grad) g = -g;
    wp->residuals(x, res, scratch);
    w.resize(res.size());
    for (size_t k = 0; k < res.size(); ++k)
      w[k] = wp->equality(k) ? mult[k] + rho * res[k] : std::max(0.0, mult[k] + rho * res[k]);
    wp->add_weighted(x, w, grad, scratch);
  }
};

void project(std::vector<double>& x, const std::vector<double>& lb,
             const std::vector<double>& ub) {
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lb[i], ub[i]);
}

double projected_grad_norm(const std::vector<double>& x, const std::vector<double>& g,
                           const std::vector<double>& lb, const std::vector<double>& ub) {
  double worst = 0;
  for (size_t i = 0; i < x.size(); ++i)
    worst = std::max(worst, std::abs(std::clamp(x[i] - g[i], lb[i], ub[i]) - x[i]));
  return worst;
}

struct LbfgsHistory {
  std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y)
  static constexpr size_t kMem = 10;

  void push(std::vector<double> s, std::vector<double> y) {
    double sy = 0;
    for (size_t i = 0; i < s.size(); ++i) sy += s[i] * y[i];
    double sn = 0, yn = 0;
    for (double v : s) sn += v * v;
    for (double v : y) yn += v * v;
    if (sy <= 1e-10 * std::sqrt(sn * yn)) return;
    pairs.emplace_back(std::move(s), std::move(y));
    if (pairs.size() > kMem) pairs.pop_front();
  }

  // Two-loop recursion applied to -g.
  void direction(const std::vector<double>& g, std::vector<double>& d) const {
    d.assign(g.size(), 0.0);
    for (size_t i = 0; i < g.size(); ++i) d[i] = -g[i];
    if (pairs.empty()) return;
    const size_t m = pairs.size();
    std::vector<double> alpha(m), rho_h(m);
    for (size_t k = 0; k < m; ++k) {
      double sy = 0;
      for (size_t i = 0; i < g.size(); ++i) sy += pairs[k].first[i] * pairs[k].second[i];
      rho_h[k] = 1.0 / sy;
    }
    for (size_t k = m; k-- > 0;) {
      double sd = 0;
      for (size_t i = 0; i < g.size(); ++i) sd += pairs[k].first[i] * d[i];
      alpha[k] = rho_h[k] * sd;
      for (size_t i = 0; i < g.size(); ++i) d[i] -= alpha[k] * pairs[k].second[i];
    }
    double yy = 0, sy = 0;
    const auto& last = pairs.back();
    for (size_t i = 0; i < g.size(); ++i) {
      yy += last.second[i] * last.second[i];
      sy += last.first[i] * last.second[i];
    }
    const double gamma = sy / yy;
    for (double& v : d) v *= gamma;
    for (size_t k = 0; k < m; ++k) {
      double yd = 0;
      for (size_t i = 0; i < g.size(); ++i) yd += pairs[k].second[i] * d[i];
      const double beta = rho_h[k] * yd;
      for (size_t i = 0; i < g.size(); ++i) d[i] += (alpha[k] - beta) * pairs[k].first[i];
    }
  }
};

/// Minimize the augmented Lagrangian over the box by projected L-BFGS with
/// Armijo backtracking. Returns the final projected-gradient norm, or -1 on
/// non-finite values.
double inner_minimize(AlState& st, std::vector<double>& x, int max_iters, double tol,
                      Clock::time_point deadline) {
  const auto& lb = *st.lb;
  const auto& ub = *st.ub;
  project(x, lb, ub);
  double f = st.value(x);
  std::vector<double> g, d, xn, gn;
  st.gradient(x, g);
  if (!std::isfinite(f) || !all_finite(g)) return -1;
  LbfgsHistory hist;
  double pg = projected_grad_norm(x, g, lb, ub);
  for (int iter = 0; iter < max_iters && pg > tol; ++iter) {
    if ((iter & 15) == 0 && Clock::now() > deadline) break;
    hist.direction(g, d);
    double dg = 0;
    for (size_t i = 0; i < x.size(); ++i) dg += d[i] * g[i];
    if (dg >= 0) {
      hist.pairs.clear();
      for (size_t i = 0; i < x.size(); ++i) d[i] = -g[i];
    }
    bool accepted = false;
    double alpha = 1.0;
    for (int bt = 0; bt < 50; ++bt, alpha *= 0.5) {
      xn = x;
      for (size_t i = 0; i < x.size(); ++i) xn[i] += alpha * d[i];
      project(xn, lb, ub);
      double gstep = 0;
      for (size_t i = 0; i < x.size(); ++i) gstep += g[i] * (xn[i] - x[i]);
      if (gstep >= 0) continue;  // projection killed the descent direction
      const double fn = st.value(xn);
      if (!std::isfinite(fn)) continue;
      if (fn <= f + 1e-4 * gstep) {
        st.gradient(xn, gn);
        if (!all_finite(gn)) return -1;
        std::vector<double> s(x.size()), y(x.size());
        for (size_t i = 0; i < x.size(); ++i) {
          s[i] = xn[i] - x[i];
          y[i] = gn[i] - g[i];
        }
        hist.push(std::move(s), std::move(y));
        x = xn;
        f = fn;
        g = gn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (hist.pairs.empty()) break;
      hist.pairs.clear();
      continue;
    }
    pg = projected_grad_norm(x, g, lb, ub);
  }
  return pg;
}

std::vector<FarkasCertificate> reconstruct_certs(const ConstraintSystem& sys,
                                                 const std::vector<double>& x) {
  std::vector<FarkasCertificate> certs;
  const bool flat = sys.instance.family == Family::polygon;
  for (int i = 0; i < sys.layout.n; ++i)
    for (int j = i + 1; j < sys.layout.n; ++j) {
      try {
        FarkasCertificate cert;
        if (flat) {
          const RegularPolygonSpec sm = polygon_constants(sys.instance.m);
          const SatResult2 sep = sat_margin_2d(sys.pose2(x, i), sys.pose2(x, j), sm);
          if (sep.margin < 0) continue;
          cert = farkas_from_axis(sys.pose2(x, i), sys.pose2(x, j), sm, sep.axis);
        } else {
          const PlatonicSpec& sm = platonic_spec(platonic_from_index(sys.instance.m));
          const SatResult3 sep = sat_margin_3d(sys.pose3(x, i), sys.pose3(x, j), sm);
          if (sep.margin < 0) continue;
          cert = farkas_from_axis(sys.pose3(x, i), sys.pose3(x, j), sm, sep.axis);
        }
        cert.i = i;
        cert.j = j;
        certs.push_back(std::move(cert));
      } catch (const CertificateError&) {
      }
    }
  return certs;
}

/// Local solves stall at ~1e-6 overlap on the nonsmooth SAT margin; this
/// clears the residue exactly: scale all centers uniformly until every pair
/// margin reaches the epsilon target, then recompute the container radius
/// from the scaled configuration.
bool repair_bodies(const ConstraintSystem& sys, std::vector<double>& x) {
  const Instance& inst = sys.instance;
  if (!inst.is_body()) return false;
  const Layout& lay = sys.layout;
  const int n = lay.n;
  const bool flat = inst.family == Family::polygon;
  const RegularPolygonSpec sm2 =
      flat ? polygon_constants(inst.m) : RegularPolygonSpec{};
  const PlatonicSpec* sm3 = flat ? nullptr : &platonic_spec(platonic_from_index(inst.m));
  const double target = std::max(inst.epsilon, 1e-12);

  bool scaled = false;
  for (int round = 0; round < 50; ++round) {
    double sigma = 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double margin, denom;
        if (flat) {
          const SatResult2 s = sat_margin_2d(sys.pose2(x, i), sys.pose2(x, j), sm2);
          margin = s.margin;
          denom = s.axis.x * (x[lay.element_offset(j)] - x[lay.element_offset(i)]) +
                  s.axis.y * (x[lay.element_offset(j) + 1] - x[lay.element_offset(i) + 1]);
        } else {
          const SatResult3 s = sat_margin_3d(sys.pose3(x, i), sys.pose3(x, j), *sm3);
          margin = s.margin;
          denom = s.axis.x * (x[lay.element_offset(j)] - x[lay.element_offset(i)]) +
                  s.axis.y * (x[lay.element_offset(j) + 1] - x[lay.element_offset(i) + 1]) +
                  s.axis.z * (x[lay.element_offset(j) + 2] - x[lay.element_offset(i) + 2]);
        }
        if (margin >= target || denom <= 1e-12) continue;
        sigma = std::max(sigma, 1 + (target - margin) / denom);
      }
    if (sigma <= 1.0) break;
    sigma *= 1 + 1e-15;
    for (int i = 0; i < n; ++i) {
      const int off = lay.element_offset(i);
      for (int c = 0; c < (flat ? 2 : 3); ++c) x[off + c] *= sigma;
    }
    scaled = true;
  }

  // Container radius exactly fitted to the (epsilon-inflated) vertices.
  const double vscale = 1 + inst.epsilon / (flat ? sm2.rho : sm3->rho);
  double needed = sys.lb[0];
  if (flat) {
    const RegularPolygonSpec sl = polygon_constants(inst.l);
    for (int i = 0; i < n; ++i) {
      const Pose2 p = sys.pose2(x, i);
      for (int j = 0; j < inst.m; ++j) {
        const Vec2 dir{std::sin(p.theta + sm2.delta[j]), std::cos(p.theta + sm2.delta[j])};
        const Vec2 v{p.x + vscale * dir.x, p.y + vscale * dir.y};
        for (int k = 0; k < inst.l; ++k) {
          const Vec2 nk{std::sin(k * sl.phi), std::cos(k * sl.phi)};
          needed = std::max(needed, -dot(nk, v) / sl.rho);
        }
      }
    }
  } else {
    const PlatonicSpec& sl = platonic_spec(platonic_from_index(inst.l));
    for (int i = 0; i < n; ++i) {
      const Pose3 p = sys.pose3(x, i);
      for (const Vec3& vert : sm3->vertices) {
        const Vec3 r = rotate_zyx(p, vert);
        const Vec3 v{p.x + vscale * r.x, p.y + vscale * r.y, p.z + vscale * r.z};
        for (const Vec3& nk : sl.normals) needed = std::max(needed, -dot(nk, v) / sl.rho);
      }
    }
  }
  const double new_r = std::clamp(needed * (1 + 1e-13), sys.lb[0], sys.ub[0]);
  scaled = scaled || new_r != x[0];
  x[0] = new_r;
  return scaled;
}

LocalResult local_solve_impl(const WorkProblem& wp, std::vector<double> x0,
                             const std::vector<double>& lb, const std::vector<double>& ub,
                             const SolverConfig& config, Clock::time_point deadline) {
  const ConstraintSystem& sys = *wp.sys;
  AlState st;
  st.wp = &wp;
  st.lb = &lb;
  st.ub = &ub;
  st.obj_sign = sys.maximize ? -1.0 : 1.0;
  st.mult.assign(wp.size(), 0.0);
  st.rho = 10;

  LocalResult out;
  const double feas_tol = std::max(sys.instance.epsilon, 1e-10);
  project(x0, lb, ub);
  std::vector<double>& x = x0;
  double inner_tol = 1e-2;
  double prev_viol = kInf;
  std::vector<double> res;
  for (int outer = 0; outer < 80; ++outer) {
    const double pg = inner_minimize(st, x, config.max_inner_iters, inner_tol, deadline);
    if (pg < 0) {
      out.aborted = true;
      break;
    }
    wp.residuals(x, res, st.scratch);
    double viol = 0;
    for (size_t k = 0; k < res.size(); ++k)
      viol = std::max(viol, wp.equality(k) ? std::abs(res[k]) : res[k]);
    out.max_violation = viol;
    if (viol <= feas_tol && pg <= config.kkt_tol) break;
    for (size_t k = 0; k < res.size(); ++k) {
      if (wp.equality(k))
        st.mult[k] += st.rho * res[k];
      else
        st.mult[k] = std::max(0.0, st.mult[k] + st.rho * res[k]);
    }
    if (viol > 0.5 * prev_viol) st.rho = std::min(st.rho * 10, 1e12);
    prev_viol = viol;
    inner_tol = std::max(config.kkt_tol, inner_tol * 0.2);
    if (Clock::now() > deadline) break;
  }
  out.x = std::move(x);
  if (!out.aborted) {
    if (sys.instance.is_body() && out.max_violation < 1e-2 &&
        repair_bodies(sys, out.x)) {
      sync_aux_variables(sys, out.x);
      write_pair_multipliers(sys, out.x, reconstruct_certs(sys, out.x));
      for (size_t i = 0; i < out.x.size(); ++i) out.x[i] = std::clamp(out.x[i], lb[i], ub[i]);
    }
    out.objective = sys.objective(out.x, st.scratch);
    wp.residuals(out.x, res, st.scratch);
    double viol = 0;
    for (size_t k = 0; k < res.size(); ++k)
      viol = std::max(viol, wp.equality(k) ? std::abs(res[k]) : res[k]);
    out.max_violation = viol;
    out.feasible = viol <= feas_tol;
  }
  return out;
}

}  // namespace

const char* solve_mode_name(SolveMode m) {
  return m == SolveMode::faithful ? "faithful" : "sat_penalty";
}

std::mt19937_64 restart_rng(std::uint64_t seed, int restart) {
  return std::mt19937_64(splitmix64(seed ^ (0x51ed270b * static_cast<std::uint64_t>(restart) +
                                            0x2545f4914f6cdd1dULL)));
}

void sync_aux_variables(const ConstraintSystem& sys, std::vector<double>& x) {
  const Instance& inst = sys.instance;
  const Layout& lay = sys.layout;
  const double eps = inst.epsilon;
  if (inst.family == Family::polygon) {
    const RegularPolygonSpec sm = polygon_constants(inst.m);
    for (int i = 0; i < lay.n; ++i) {
      const int off = lay.element_offset(i);
      const double cx = x[off], cy = x[off + 1], th = x[off + 2];
      for (int j = 0; j < inst.m; ++j) {
        const double a = std::sin(th + j * sm.phi), b = std::cos(th + j * sm.phi);
        x[lay.aux_offset(i) + 3 * j] = a;
        x[lay.aux_offset(i) + 3 * j + 1] = b;
        x[lay.aux_offset(i) + 3 * j + 2] = a * cx + b * cy - (sm.rho + eps / 2);
      }
    }
  } else if (inst.family == Family::platonic) {
    const PlatonicSpec& sm = platonic_spec(platonic_from_index(inst.m));
    const int nf = static_cast<int>(sm.faces.size());
    for (int i = 0; i < lay.n; ++i) {
      const Pose3 p = sys.pose3(x, i);
      for (int f = 0; f < nf; ++f) {
        const Vec3 nr = rotate_zyx(p, sm.normals[f]);
        const int off = lay.aux_offset(i) + 4 * f;
        x[off] = nr.x;
        x[off + 1] = nr.y;
        x[off + 2] = nr.z;
        x[off + 3] = nr.x * p.x + nr.y * p.y + nr.z * p.z - (sm.rho + eps / 2);
      }
    }
  }
}

namespace {

// Inner-variant pair variables from a separating axis: the angle(s) encoding
// the unit direction plus the offset midway between the two projections.
void write_inner_pair(const ConstraintSystem& sys, std::vector<double>& x, int i, int j,
                      const std::vector<double>& axis) {
  const Layout& lay = sys.layout;
  const int off = lay.pair_offset(i, j);
  if (sys.instance.family == Family::polygon) {
    const RegularPolygonSpec sm = polygon_constants(sys.instance.m);
    double ang = std::atan2(axis[0], axis[1]);
    if (ang < 0) ang += 2 * kPi;
    const Pose2 pi = sys.pose2(x, i), pj = sys.pose2(x, j);
    double hi = -kInf, lo = kInf;
    for (int k = 0; k < sm.m; ++k) {
      const Vec2 vi = polygon_vertex(pi, sm, k), vj = polygon_vertex(pj, sm, k);
      hi = std::max(hi, axis[0] * vi.x + axis[1] * vi.y);
      lo = std::min(lo, axis[0] * vj.x + axis[1] * vj.y);
    }
    x[off] = std::clamp(ang, sys.lb[off], sys.ub[off]);
    x[off + 1] = (hi + lo) / 2;
  } else {
    const PlatonicSpec& sm = platonic_spec(platonic_from_index(sys.instance.m));
    const double uz = std::clamp(axis[2], -1.0, 1.0);
    const double pol = std::acos(uz);
    double az = std::atan2(axis[0], axis[1]);
    if (az < 0) az += 2 * kPi;
    const Pose3 pi = sys.pose3(x, i), pj = sys.pose3(x, j);
    double hi = -kInf, lo = kInf;
    for (size_t k = 0; k < sm.vertices.size(); ++k) {
      const Vec3 vi = solid_vertex(pi, sm, static_cast<int>(k));
      const Vec3 vj = solid_vertex(pj, sm, static_cast<int>(k));
      hi = std::max(hi, axis[0] * vi.x + axis[1] * vi.y + axis[2] * vi.z);
      lo = std::min(lo, axis[0] * vj.x + axis[1] * vj.y + axis[2] * vj.z);
    }
    x[off] = std::clamp(az, sys.lb[off], sys.ub[off]);
    x[off + 1] = std::clamp(pol, sys.lb[off + 1], sys.ub[off + 1]);
    x[off + 2] = (hi + lo) / 2;
  }
}

}  // namespace

void write_pair_multipliers(const ConstraintSystem& sys, std::vector<double>& x,
                            const std::vector<FarkasCertificate>& certs) {
  const Layout& lay = sys.layout;
  const Variant variant = sys.instance.variant;
  for (const FarkasCertificate& cert : certs) {
    if (variant == Variant::inner) {
      write_inner_pair(sys, x, cert.i, cert.j, cert.axis);
      continue;
    }
    const int off = lay.pair_offset(cert.i, cert.j);
    const size_t m = cert.lambdas.size() / 2;
    double scale = 1.0;
    if (variant == Variant::farkas) {
      // That variant wants each body's multipliers to sum to at least one.
      double si = 0, sj = 0;
      for (size_t k = 0; k < m; ++k) {
        si += cert.lambdas[k];
        sj += cert.lambdas[k + m];
      }
      scale = 1.0 / std::max(1e-300, std::min(si, sj));
    }
    for (size_t k = 0; k < cert.lambdas.size(); ++k)
      x[off + static_cast<int>(k)] =
          std::clamp(scale * cert.lambdas[k], sys.lb[off + k], sys.ub[off + k]);
  }
}

std::vector<double> sample_start(const ConstraintSystem& sys, std::mt19937_64& rng) {
  const Instance& inst = sys.instance;
  const Layout& lay = sys.layout;
  std::vector<double> x(sys.dim(), 0.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  switch (inst.family) {
    case Family::circle_square:
    case Family::circle_rect: {
      double alpha = 1.0;
      if (lay.container_size == 1) {
        alpha = uni(0.3, 1.0);
        x[0] = alpha;
      }
      const double rmax = std::min(alpha, 2 - alpha) / 2;
      for (int i = 0; i < lay.n; ++i) {
        const int off = lay.element_offset(i);
        x[off] = uni(0, alpha);
        x[off + 1] = uni(0, 2 - alpha);
        x[off + 2] = rmax * (1.0 - u01(rng));  // (0, rmax]
      }
      break;
    }
    case Family::circle_ellipse: {
      const int n = lay.n;
      if (n > 1 && u01(rng) < 0.5) {
        // Jittered staggered-row layout with a random partition of n into
        // rows; near-optimal ellipse packings are lattice-like, so these
        // seed far better basins than uniform clouds.
        const int rows = 1 + static_cast<int>(u01(rng) * std::min(4.0, double(n)));
        std::vector<int> cnt(rows, n / rows);
        for (int e = 0; e < n % rows; ++e) ++cnt[(rows / 2 + e) % rows];
        double mx = 0, my = 0;
        int i = 0;
        for (int r = 0; r < rows; ++r) {
          const double y = (r - (rows - 1) / 2.0) * std::sqrt(3.0);
          for (int c = 0; c < cnt[r]; ++c, ++i) {
            const int off = lay.element_offset(i);
            x[off] = (c - (cnt[r] - 1) / 2.0) * 2 + (r % 2) + uni(-0.3, 0.3);
            x[off + 1] = y + uni(-0.3, 0.3);
            mx = std::max(mx, std::abs(x[off]));
            my = std::max(my, std::abs(x[off + 1]));
          }
        }
        x[0] = std::clamp(1.1 * (mx + 1.3), sys.lb[0], sys.ub[0]);
        x[1] = std::clamp(1.1 * (my + 1.3), sys.lb[1], sys.ub[1]);
        for (int k = 0; k < n; ++k) {
          const int off = lay.element_offset(k);
          x[off] = std::clamp(x[off], sys.lb[off], sys.ub[off]);
          x[off + 1] = std::clamp(x[off + 1], sys.lb[off + 1], sys.ub[off + 1]);
          x[off + 2] = std::clamp(x[0] * x[0] + 1, sys.lb[off + 2], sys.ub[off + 2]);
        }
        break;
      }
      const double a = uni(sys.lb[0], std::min(sys.ub[0], sys.lb[0] + std::sqrt(double(inst.n)) + 1));
      const double b = uni(std::min(a, sys.lb[1]), a);
      x[0] = a;
      x[1] = b;
      const double tval = std::clamp(a * a + 1, sys.lb[lay.element_offset(0) + 2],
                                     sys.ub[lay.element_offset(0) + 2]);
      for (int i = 0; i < lay.n; ++i) {
        const int off = lay.element_offset(i);
        x[off] = uni(std::max(sys.lb[off], -(a - 1)), std::min(sys.ub[off], a - 1));
        x[off + 1] = uni(std::max(sys.lb[off + 1], -(b - 1)), std::min(sys.ub[off + 1], b - 1));
        x[off + 2] = tval;
      }
      break;
    }
    case Family::polygon: {
      const RegularPolygonSpec sm = polygon_constants(inst.m);
      const double rho_l = std::cos(kPi / inst.l);
      const double r0 = std::clamp(2 * container_lower_bound(inst), sys.lb[0], sys.ub[0]);
      x[0] = r0;
      const double crad = std::max(0.0, r0 * rho_l - 1);
      for (int i = 0; i < lay.n; ++i) {
        const int off = lay.element_offset(i);
        const double rr = crad * std::sqrt(u01(rng));
        const double ang = uni(0, 2 * kPi);
        x[off] = rr * std::sin(ang);
        x[off + 1] = rr * std::cos(ang);
        x[off + 2] = uni(sys.lb[off + 2], sys.ub[off + 2]);
      }
      break;
    }
    case Family::platonic: {
      const double rho_l = platonic_spec(platonic_from_index(inst.l)).rho;
      const double r0 = std::clamp(2 * container_lower_bound(inst), sys.lb[0], sys.ub[0]);
      x[0] = r0;
      const double crad = std::max(0.0, r0 * rho_l - 1);
      for (int i = 0; i < lay.n; ++i) {
        const int off = lay.element_offset(i);
        const double rr = crad * std::cbrt(u01(rng));
        const double z = uni(-1, 1);
        const double ang = uni(0, 2 * kPi);
        const double s = std::sqrt(std::max(0.0, 1 - z * z));
        x[off] = rr * s * std::sin(ang);
        x[off + 1] = rr * s * std::cos(ang);
        x[off + 2] = rr * z;
        for (int c = 3; c < 6; ++c) x[off + c] = uni(sys.lb[off + c], sys.ub[off + c]);
      }
      break;
    }
  }

  if (inst.is_body()) {
    sync_aux_variables(sys, x);
    for (int i = 0; i < lay.n; ++i)
      for (int j = i + 1; j < lay.n; ++j) {
        const int off = lay.pair_offset(i, j);
        if (inst.variant == Variant::inner) {
          std::vector<double> axis;
          // axis from the center difference, falling back to +x
          if (inst.family == Family::polygon) {
            Vec2 d{x[lay.element_offset(j)] - x[lay.element_offset(i)],
                   x[lay.element_offset(j) + 1] - x[lay.element_offset(i) + 1]};
            const double nn = norm(d);
            if (nn < 1e-12) d = {1, 0};
            else d = (1 / nn) * d;
            axis = {d.x, d.y};
          } else {
            Vec3 d{x[lay.element_offset(j)] - x[lay.element_offset(i)],
                   x[lay.element_offset(j) + 1] - x[lay.element_offset(i) + 1],
                   x[lay.element_offset(j) + 2] - x[lay.element_offset(i) + 2]};
            const double nn = norm(d);
            if (nn < 1e-12) d = {1, 0, 0};
            else d = (1 / nn) * d;
            axis = {d.x, d.y, d.z};
          }
          write_inner_pair(sys, x, i, j, axis);
        } else {
          const int stride = lay.pair_stride;
          double total = 0;
          for (int k = 0; k < stride; ++k) {
            x[off + k] = u01(rng) + 1e-6;
            total += x[off + k];
          }
          if (inst.variant == Variant::farkas) {
            double si = 0, sj = 0;
            for (int k = 0; k < stride / 2; ++k) si += x[off + k];
            for (int k = stride / 2; k < stride; ++k) sj += x[off + k];
            for (int k = 0; k < stride / 2; ++k) x[off + k] /= si;
            for (int k = stride / 2; k < stride; ++k) x[off + k] /= sj;
          } else {
            for (int k = 0; k < stride; ++k) x[off + k] /= total;
          }
        }
      }
  }

  for (int i = 0; i < sys.dim(); ++i) x[i] = std::clamp(x[i], sys.lb[i], sys.ub[i]);
  return x;
}

LocalResult local_solve(const ConstraintSystem& sys, std::vector<double> x0,
                        const SolverConfig& config) {
  sys.check_dim(x0);
  const WorkProblem wp = make_work(sys, config.mode);
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(config.time_budget));
  return local_solve_impl(wp, std::move(x0), sys.lb, sys.ub, config, deadline);
}

namespace {

// Deterministic grid placements tried before random restarts; they seed
// identity packings and lattice layouts the random sampler rarely hits.
std::vector<std::vector<double>> structured_starts(const ConstraintSystem& sys) {
  const Instance& inst = sys.instance;
  const Layout& lay = sys.layout;
  const int n = lay.n;
  std::vector<std::vector<double>> starts;
  std::vector<double> x(sys.dim(), 0.0);

  switch (inst.family) {
    case Family::circle_square:
    case Family::circle_rect: {
      const int g = static_cast<int>(std::ceil(std::sqrt(double(n))));
      const double cell = 1.0 / g;
      if (lay.container_size == 1) x[0] = 1.0;
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        x[off] = (i % g + 0.5) * cell;
        x[off + 1] = (i / g + 0.5) * cell;
        x[off + 2] = 0.999 * cell / 2;
      }
      starts.push_back(x);
      break;
    }
    case Family::circle_ellipse: {
      // one row of touching unit circles
      const double spacing = 2.0001;
      const double a = std::clamp((n - 1) * spacing / 2 + 1.001, sys.lb[0], sys.ub[0]);
      const double b = 1.001;
      x[0] = a;
      x[1] = b;
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        x[off] = std::clamp((i - (n - 1) / 2.0) * spacing, sys.lb[off], sys.ub[off]);
        x[off + 1] = 0;
        x[off + 2] = std::clamp(a * a + 1, sys.lb[off + 2], sys.ub[off + 2]);
      }
      starts.push_back(x);
      // staggered multi-row layouts (rows touch at horizontal offset 1)
      for (int rows = 2; rows <= 3 && rows < n; ++rows) {
        std::vector<int> cnt(rows, n / rows);
        for (int e = 0; e < n % rows; ++e) ++cnt[(rows / 2 + e) % rows];
        double mx = 0, my = 0;
        int i = 0;
        for (int r = 0; r < rows; ++r) {
          const double y = (r - (rows - 1) / 2.0) * std::sqrt(3.0);
          for (int c = 0; c < cnt[r]; ++c, ++i) {
            const int off = lay.element_offset(i);
            const double px = (c - (cnt[r] - 1) / 2.0) * 2 + (r % 2);
            x[off] = px;
            x[off + 1] = y;
            mx = std::max(mx, std::abs(px));
            my = std::max(my, std::abs(y));
          }
        }
        x[0] = std::clamp(1.1 * (mx + 1.3), sys.lb[0], sys.ub[0]);
        x[1] = std::clamp(1.1 * (my + 1.3), sys.lb[1], sys.ub[1]);
        for (int k = 0; k < n; ++k) {
          const int off = lay.element_offset(k);
          x[off] = std::clamp(x[off], sys.lb[off], sys.ub[off]);
          x[off + 1] = std::clamp(x[off + 1], sys.lb[off + 1], sys.ub[off + 1]);
          x[off + 2] = std::clamp(x[0] * x[0] + 1, sys.lb[off + 2], sys.ub[off + 2]);
        }
        starts.push_back(x);
      }
      // hex-lattice layouts clipped to a few aspect ratios
      for (const double q : {1.0, 1.75, 2.8}) {
        std::vector<Vec2> pts;
        const int range = n + 2;
        for (int row = -range; row <= range; ++row)
          for (int col = -range; col <= range; ++col)
            pts.push_back({2.0 * col + (row & 1 ? 1.0 : 0.0), std::sqrt(3.0) * row});
        std::sort(pts.begin(), pts.end(), [&](const Vec2& p, const Vec2& r) {
          const double fp = std::hypot(p.x / q, p.y), fr = std::hypot(r.x / q, r.y);
          if (fp != fr) return fp < fr;
          return std::pair(p.x, p.y) < std::pair(r.x, r.y);
        });
        double mx = 0, my = 0;
        for (int i = 0; i < n; ++i) {
          mx = std::max(mx, std::abs(pts[i].x));
          my = std::max(my, std::abs(pts[i].y));
        }
        const double ha = std::clamp(1.1 * (mx + 1.3), sys.lb[0], sys.ub[0]);
        const double hb = std::clamp(1.1 * (my + 1.3), sys.lb[1], sys.ub[1]);
        x[0] = ha;
        x[1] = hb;
        for (int i = 0; i < n; ++i) {
          const int off = lay.element_offset(i);
          x[off] = std::clamp(pts[i].x, sys.lb[off], sys.ub[off]);
          x[off + 1] = std::clamp(pts[i].y, sys.lb[off + 1], sys.ub[off + 1]);
          x[off + 2] = std::clamp(ha * ha + 1, sys.lb[off + 2], sys.ub[off + 2]);
        }
        starts.push_back(x);
      }
      break;
    }
    case Family::polygon:
    case Family::platonic: {
      const bool flat = inst.family == Family::polygon;
      const int dim = flat ? 2 : 3;
      double rho_m, rho_l;
      if (flat) {
        rho_m = polygon_constants(inst.m).rho;
        rho_l = polygon_constants(inst.l).rho;
      } else {
        rho_m = platonic_spec(platonic_from_index(inst.m)).rho;
        rho_l = platonic_spec(platonic_from_index(inst.l)).rho;
      }
      const int g = static_cast<int>(std::ceil(std::pow(double(n), 1.0 / dim) - 1e-9));
      const double sp = 2 * rho_m + 1e-3;
      double reach = 0;
      for (int i = 0; i < n; ++i) {
        const int off = lay.element_offset(i);
        const int gx = i % g, gy = (i / g) % g, gz = i / (g * g);
        x[off] = (gx - (g - 1) / 2.0) * sp;
        x[off + 1] = (gy - (g - 1) / 2.0) * sp;
        if (!flat) x[off + 2] = (gz - (g - 1) / 2.0) * sp;
        double cn = std::hypot(x[off], x[off + 1]);
        if (!flat) cn = std::hypot(cn, x[off + 2]);
        reach = std::max(reach, cn + 1.0 + 2 * inst.epsilon);
      }
      x[0] = std::clamp(reach / rho_l * 1.0001, sys.lb[0], sys.ub[0]);
      sync_aux_variables(sys, x);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const int off = lay.pair_offset(i, j);
          if (inst.variant == Variant::inner) {
            std::vector<double> axis;
            if (flat) {
              Vec2 d{x[lay.element_offset(j)] - x[lay.element_offset(i)],
                     x[lay.element_offset(j) + 1] - x[lay.element_offset(i) + 1]};
              const double nn = norm(d);
              axis = nn < 1e-12 ? std::vector<double>{1, 0}
                                : std::vector<double>{d.x / nn, d.y / nn};
            } else {
              Vec3 d{x[lay.element_offset(j)] - x[lay.element_offset(i)],
                     x[lay.element_offset(j) + 1] - x[lay.element_offset(i) + 1],
                     x[lay.element_offset(j) + 2] - x[lay.element_offset(i) + 2]};
              const double nn = norm(d);
              axis = nn < 1e-12 ? std::vector<double>{1, 0, 0}
                                : std::vector<double>{d.x / nn, d.y / nn, d.z / nn};
            }
            write_inner_pair(sys, x, i, j, axis);
          } else {
            const int stride = lay.pair_stride;
            const double v = (inst.variant == Variant::farkas) ? 2.0 / stride : 1.0 / stride;
            for (int k = 0; k < stride; ++k) x[off + k] = v;
          }
        }
      starts.push_back(x);
      break;
    }
  }
  for (auto& s : starts)
    for (int i = 0; i < sys.dim(); ++i) s[i] = std::clamp(s[i], sys.lb[i], sys.ub[i]);
  return starts;
}

// Hop restart: jitter the incumbent's poses and loosen the container so the
// local solver can hop to a neighbouring basin instead of starting cold.
void perturb_start(const ConstraintSystem& sys, std::vector<double>& x,
                   std::mt19937_64& rng) {
  const Instance& inst = sys.instance;
  const Layout& lay = sys.layout;
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  // Log-uniform kick size (~0.04 .. ~0.8): small moves polish the basin,
  // large ones escape it.
  const double s = 0.04 * std::pow(10.0, 1.3 * u01(rng));
  const int cdim = inst.family == Family::platonic ? 3 : 2;
  // Center jitter scales with the container so kicks are comparable across
  // families (unit square vs R- or a-sized containers).
  const double scale =
      (inst.family == Family::circle_square || inst.family == Family::circle_rect)
          ? 1.0
          : std::max(1.0, x[0]);
  for (int i = 0; i < lay.n; ++i) {
    const int off = lay.element_offset(i);
    for (int c = 0; c < cdim; ++c) x[off + c] += 0.25 * s * scale * g(rng);
  }
  // Sometimes also teleport one or two elements to fresh spots; relocations
  // escape basins that plain jitter cannot.
  if (lay.n > 1) {
    const double tp = u01(rng);
    const int teleports = tp < 0.2 ? 2 : tp < 0.5 ? 1 : 0;
    std::uniform_int_distribution<int> pick(0, lay.n - 1);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    const bool unit_box =
        inst.family == Family::circle_square || inst.family == Family::circle_rect;
    for (int k = 0; k < teleports; ++k) {
      const int off = lay.element_offset(pick(rng));
      for (int c = 0; c < cdim; ++c)
        x[off + c] = unit_box ? 0.5 + 0.5 * u(rng) : scale * u(rng);
    }
  }
  switch (inst.family) {
    case Family::circle_square:
    case Family::circle_rect:
      // Shrink radii a touch so the jittered centers start nearly feasible.
      for (int i = 0; i < lay.n; ++i) x[lay.element_offset(i) + 2] *= 0.95;
      break;
    case Family::circle_ellipse:
      x[0] *= 1.0 + 0.02 * std::abs(g(rng));
      x[1] *= 1.0 + 0.02 * std::abs(g(rng));
      break;
    case Family::polygon:
    case Family::platonic: {
      x[0] *= 1.0 + 0.02 * std::abs(g(rng));
      const int adim = inst.family == Family::polygon ? 1 : 3;
      for (int i = 0; i < lay.n; ++i) {
        const int off = lay.element_offset(i) + cdim;
        for (int c = 0; c < adim; ++c) x[off + c] += 0.3 * s * g(rng);
      }
      break;
    }
  }
  for (int i = 0; i < sys.dim(); ++i) x[i] = std::clamp(x[i], sys.lb[i], sys.ub[i]);
  if (inst.is_body()) sync_aux_variables(sys, x);
}

// Geometric repair of a converged point. The AL feasibility tolerance can eat
// the whole epsilon margin (circles overlapping a wall or each other by
// ~1e-8), and the S-lemma minors lose sensitivity near tangency (axes stalled
// short of, or a hair beyond, the tangent configuration). Updates obj.
void repair_point(const ConstraintSystem& sys, std::vector<double>& x, double& obj) {
  const Layout& lay = sys.layout;
  if (sys.instance.family == Family::circle_square ||
      sys.instance.family == Family::circle_rect) {
    // Shrink every radius just past the worst violation.
    const double alpha = lay.container_size == 1 ? x[0] : 1.0;
    double need = 0;
    for (int i = 0; i < lay.n; ++i) {
      const int off = lay.element_offset(i);
      const double cxi = x[off], cyi = x[off + 1], ri = x[off + 2];
      need = std::max({need, ri - cxi, ri - (alpha - cxi), ri - cyi,
                       ri - (2 - alpha - cyi)});
      for (int j = i + 1; j < lay.n; ++j) {
        const int offj = lay.element_offset(j);
        const double d = std::hypot(cxi - x[offj], cyi - x[offj + 1]);
        need = std::max(need, (ri + x[offj + 2] - d) / 2);
      }
    }
    if (need > 0) {
      const double delta = need + 1e-13;
      obj = 0;
      for (int i = 0; i < lay.n; ++i) {
        const int off = lay.element_offset(i);
        x[off + 2] = std::max(x[off + 2] - delta, sys.lb[off + 2]);
        obj += x[off + 2];
      }
    }
  } else if (sys.instance.family == Family::circle_ellipse) {
    // Rescale both axes by the smallest factor that keeps every circle
    // inside with a small margin.
    const double r_model = 1 + 2 * sys.instance.epsilon;
    const double rr = r_model + std::max(sys.instance.epsilon, 1e-12);
    auto all_inside = [&](double tau) {
      for (int i = 0; i < lay.n; ++i) {
        const int off = lay.element_offset(i);
        if (!slemma_contains(tau * x[0], tau * x[1], x[off], x[off + 1], rr)) return false;
      }
      return true;
    };
    double lo = 1.0, hi = 1.0;
    if (all_inside(1.0)) {
      lo = 1 - 1e-7;
      while (all_inside(lo) && lo > 0.5) lo = 1 - 2 * (1 - lo);
    } else {
      hi = 1 + 1e-7;
      while (!all_inside(hi) && hi < 1.01) hi = 1 + 2 * (hi - 1);
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = (lo + hi) / 2;
      (all_inside(mid) ? hi : lo) = mid;
    }
    if (all_inside(hi)) {
      x[0] = std::clamp(hi * x[0], sys.lb[0], sys.ub[0]);
      x[1] = std::clamp(hi * x[1], sys.lb[1], sys.ub[1]);
      obj = kPi * x[0] * x[1];
    }
  }
}

// The t multipliers that came out of the local solve belong to the axes
// before repair_point rescaled them; recompute each one so the model rows
// hold at the final axes. Kept out of the restart loop: certificate-boundary
// t values make poor warm starts for the next hop.
void refresh_ellipse_multipliers(const ConstraintSystem& sys, std::vector<double>& x) {
  const double r_model = 1 + 2 * sys.instance.epsilon;
  for (int i = 0; i < sys.layout.n; ++i) {
    const int off = sys.layout.element_offset(i);
    auto cert = slemma_contains(x[0], x[1], x[off], x[off + 1], r_model);
    if (cert) x[off + 2] = std::clamp(cert->t, sys.lb[off + 2], sys.ub[off + 2]);
  }
}

bool better(bool maximize, double a, double b) { return maximize ? a > b : a < b; }

bool meets_target(bool maximize, double obj, double target) {
  return maximize ? obj >= target : obj <= target;
}

}  // namespace

SolveReport multistart(const ConstraintSystem& sys, const SolverConfig& config) {
  const auto t0 = Clock::now();
  const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                                 std::chrono::duration<double>(config.time_budget));
  const WorkProblem wp = make_work(sys, config.mode);
  const auto starts = structured_starts(sys);

  SolveReport report;
  std::mutex mtx;
  std::vector<double> lb = sys.lb, ub = sys.ub;
  std::optional<std::vector<double>> best_x;
  double best_obj = 0;
  int best_restart = -1;
  std::atomic<int> next_restart{0};
  std::atomic<bool> stop{false};

  auto lane = [&]() {
    // Hop chain: the walk accepts any result within a band of the global
    // best, so it can traverse plateaus the strictly-best incumbent cannot.
    std::vector<double> chain;
    for (;;) {
      if (stop.load()) return;
      const int r = next_restart.fetch_add(1);
      if (r >= config.restarts) return;
      if (Clock::now() > deadline) {
        stop.store(true);
        std::lock_guard lock(mtx);
        if (report.termination.empty()) report.termination = "time_budget";
        return;
      }
      std::vector<double> x0;
      bool hop = false;
      if (r >= static_cast<int>(starts.size()) && (r & 1)) {
        if (!chain.empty()) {
          x0 = chain;
          hop = true;
        } else {
          std::lock_guard lock(mtx);
          if (best_x) {
            x0 = *best_x;  // hop restart: perturb the incumbent
            hop = true;
          }
        }
      }
      if (hop) {
        auto rng = restart_rng(config.seed, r);
        perturb_start(sys, x0, rng);
      } else if (r < static_cast<int>(starts.size())) {
        x0 = starts[r];
      } else {
        auto rng = restart_rng(config.seed, r);
        x0 = sample_start(sys, rng);
      }
      std::vector<double> lane_lb, lane_ub;
      {
        std::lock_guard lock(mtx);
        lane_lb = lb;
        lane_ub = ub;
      }
      for (size_t i = 0; i < x0.size(); ++i) x0[i] = std::clamp(x0[i], lane_lb[i], lane_ub[i]);
      LocalResult res = local_solve_impl(wp, std::move(x0), lane_lb, lane_ub, config, deadline);
      if (!res.aborted && res.feasible) repair_point(sys, res.x, res.objective);
      std::lock_guard lock(mtx);
      ++report.restarts_completed;
      if (res.aborted || !res.feasible) continue;
      const bool strict = !best_x || better(sys.maximize, res.objective, best_obj);
      {
        // Accept into the hop chain anything within 1% of the global best.
        const double ref = strict ? res.objective : best_obj;
        const double band = sys.maximize ? ref * 0.99 : ref * 1.01;
        if (!better(sys.maximize, band, res.objective)) {
          chain = res.x;
        }
      }
      const bool improves = strict || (best_x && res.objective == best_obj && r < best_restart);
      if (strict) report.incumbents.emplace_back(r, res.objective);
      if (improves) {
        best_x = std::move(res.x);
        best_obj = res.objective;
        best_restart = r;
        tighten_ellipse_bounds(sys.instance, best_obj, lb, ub);
        if (config.target_objective &&
            meets_target(sys.maximize, best_obj, *config.target_objective)) {
          report.termination = "target_reached";
          stop.store(true);
        }
      }
    }
  };

  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    lane();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(lane);
    for (auto& th : pool) th.join();
  }

  if (report.termination.empty())
    report.termination = best_x ? "restarts_exhausted" : "no_feasible_restart";

  if (best_x) {
    std::vector<double>& x = *best_x;
    if (sys.instance.is_body()) {
      // Certificates from the SAT-optimal axes, folded back into the
      // multiplier block so the full formulation holds.
      report.farkas = reconstruct_certs(sys, x);
      if (config.mode == SolveMode::sat_penalty) {
        sync_aux_variables(sys, x);
        write_pair_multipliers(sys, x, report.farkas);
      }
    } else if (sys.instance.family == Family::circle_ellipse) {
      refresh_ellipse_multipliers(sys, x);
      for (int i = 0; i < sys.layout.n; ++i) {
        const int off = sys.layout.element_offset(i);
        auto cert = slemma_contains(x[0], x[1], x[off], x[off + 1], 1.0);
        if (cert) {
          cert->circle = i;
          report.slemma.push_back(*cert);
        }
      }
    }
    Solution sol;
    sol.instance_id = sys.instance.id();
    sol.values = std::move(x);
    sol.objective = best_obj;
    sol.meta.seed = config.seed;
    sol.meta.restarts_used = report.restarts_completed;
    sol.meta.wall_time = seconds_since(t0);
    report.best = std::move(sol);
  }
  return report;
}

SolveReport multistart(const Instance& instance, const SolverConfig& config) {
  const ConstraintSystem sys = build_system(instance);
  return multistart(sys, config);
}

}  // namespace packing
