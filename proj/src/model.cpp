#include "packing/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace packing {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::circle_square: return "circle_square";
    case Family::circle_rect: return "circle_rect";
    case Family::circle_ellipse: return "circle_ellipse";
    case Family::polygon: return "polygon";
    case Family::platonic: return "platonic";
  }
  return "?";
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::dist: return "dist";
    case Variant::nodist: return "nodist";
    case Variant::inner: return "inner";
    case Variant::farkas: return "farkas";
    case Variant::sym: return "sym";
  }
  return "?";
}

std::optional<Family> family_from_name(const std::string& s) {
  for (Family f : {Family::circle_square, Family::circle_rect, Family::circle_ellipse,
                   Family::polygon, Family::platonic})
    if (s == family_name(f)) return f;
  return std::nullopt;
}

std::optional<Variant> variant_from_name(const std::string& s) {
  for (Variant v : {Variant::dist, Variant::nodist, Variant::inner, Variant::farkas, Variant::sym})
    if (s == variant_name(v)) return v;
  return std::nullopt;
}

const char* tag_name(Tag t) {
  switch (t) {
    case Tag::containment: return "containment";
    case Tag::separation: return "separation";
    case Tag::farkas_sum: return "farkas_sum";
    case Tag::distance: return "distance";
    case Tag::symmetry: return "symmetry";
    case Tag::area: return "area";
    case Tag::strengthening: return "strengthening";
    case Tag::halfspace: return "halfspace";
  }
  return "?";
}

std::string Instance::id() const {
  std::ostringstream os;
  os << family_name(family) << "_n" << n;
  if (is_body()) os << "_l" << l << "_m" << m << "_" << variant_name(variant);
  if (family == Family::circle_ellipse) {
    os << (ellipse.strengthening ? "_str" : "_plain");
    switch (ellipse.symmetry) {
      case SymmetryMode::none: break;
      case SymmetryMode::centroid: os << "_centroid"; break;
      case SymmetryMode::sort_x: os << "_sortx"; break;
      case SymmetryMode::generic_line: os << "_line"; break;
    }
  }
  return os.str();
}

void Instance::validate() const {
  if (n < 1) throw InvalidInstanceError("instance needs n >= 1");
  if (epsilon < 0) throw InvalidInstanceError("epsilon must be nonnegative");
  if (family == Family::polygon) {
    if (m < 3 || l < 3) throw InvalidInstanceError("polygon orders must be >= 3");
  } else if (family == Family::platonic) {
    if (m < 1 || m > 5 || l < 1 || l > 5)
      throw InvalidInstanceError("platonic type indices must be 1..5");
  }
}

int Layout::pair_index(int i, int j) const {
  // lexicographic rank of (i, j) with i < j over n elements
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

void ConstraintSystem::check_dim(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim())
    throw std::invalid_argument("value vector does not match instance layout");
}

void ConstraintSystem::residuals(std::span<const double> x, std::vector<double>& out,
                                 EvalScratch& scratch) const {
  check_dim(x);
  out.resize(rows.size());
  for (size_t k = 0; k < rows.size(); ++k) out[k] = rows[k].tape.eval(x, scratch.stack);
}

double ConstraintSystem::objective(std::span<const double> x, EvalScratch& scratch) const {
  check_dim(x);
  return objective_tape.eval(x, scratch.stack);
}

void ConstraintSystem::objective_gradient(std::span<const double> x, std::vector<double>& grad,
                                          EvalScratch& scratch) const {
  check_dim(x);
  grad.assign(dim(), 0.0);
  for (const auto& [var, tape] : objective_grad) grad[var] += tape.eval(x, scratch.stack);
}

void ConstraintSystem::add_weighted_jacobian(std::span<const double> x, std::span<const double> w,
                                             std::vector<double>& grad,
                                             EvalScratch& scratch) const {
  check_dim(x);
  for (size_t k = 0; k < rows.size(); ++k) {
    if (w[k] == 0) continue;
    for (const auto& [var, tape] : rows[k].grad) grad[var] += w[k] * tape.eval(x, scratch.stack);
  }
}

void ConstraintSystem::jacobian(std::span<const double> x,
                                std::vector<std::tuple<int, int, double>>& out,
                                EvalScratch& scratch) const {
  check_dim(x);
  out.clear();
  for (size_t k = 0; k < rows.size(); ++k)
    for (const auto& [var, tape] : rows[k].grad)
      out.emplace_back(static_cast<int>(k), var, tape.eval(x, scratch.stack));
}

Pose2 ConstraintSystem::pose2(std::span<const double> x, int i) const {
  const int off = layout.element_offset(i);
  if (instance.family == Family::polygon) return {x[off], x[off + 1], x[off + 2]};
  return {x[off], x[off + 1], 0};  // circles: no rotation
}

Pose3 ConstraintSystem::pose3(std::span<const double> x, int i) const {
  const int off = layout.element_offset(i);
  return {x[off], x[off + 1], x[off + 2], x[off + 3], x[off + 4], x[off + 5]};
}

double container_lower_bound(const Instance& instance) {
  switch (instance.family) {
    case Family::circle_square:
    case Family::circle_rect: return 0;
    case Family::circle_ellipse: return std::sqrt(static_cast<double>(instance.n));
    case Family::polygon: {
      const double phim = 2 * kPi / instance.m, phil = 2 * kPi / instance.l;
      return std::sqrt(instance.n * instance.m * std::sin(phim) / (instance.l * std::sin(phil)));
    }
    case Family::platonic: {
      const auto& sm = platonic_spec(platonic_from_index(instance.m));
      const auto& sl = platonic_spec(platonic_from_index(instance.l));
      return std::cbrt(instance.n * sm.volume / sl.volume);
    }
  }
  return 0;
}

double container_upper_bound(const Instance& instance) {
  switch (instance.family) {
    case Family::circle_square:
    case Family::circle_rect: return 1;
    case Family::circle_ellipse: return instance.n + 1;
    case Family::polygon: {
      const double rho_l = std::cos(kPi / instance.l);
      return 2 * container_lower_bound(instance) + 2 / rho_l;
    }
    case Family::platonic: {
      const double rho_l = platonic_spec(platonic_from_index(instance.l)).rho;
      return 2 * container_lower_bound(instance) + 2 / rho_l;
    }
  }
  return 1;
}

namespace {

struct Builder {
  ConstraintSystem sys;
  EvalScratch scratch;

  void add_row(const Expr& e, bool equality, Tag tag) {
    ResidualRow row;
    row.expr = e;
    row.equality = equality;
    row.tag = tag;
    row.tape = compile(e);
    std::set<int> vars;
    collect_vars(e, vars);
    for (int v : vars) row.grad.emplace_back(v, compile(diff(e, v)));
    sys.rows.push_back(std::move(row));
  }

  void set_objective(const Expr& e, bool maximize) {
    sys.maximize = maximize;
    sys.objective_expr = e;
    sys.objective_tape = compile(e);
    std::set<int> vars;
    collect_vars(e, vars);
    for (int v : vars) sys.objective_grad.emplace_back(v, compile(diff(e, v)));
  }

  void var(const std::string& name, double lo, double hi) {
    sys.var_names.push_back(name);
    sys.lb.push_back(lo);
    sys.ub.push_back(hi);
  }
};

std::string idx2(const std::string& base, int i, int j) {
  return base + "_" + std::to_string(i) + "_" + std::to_string(j);
}

ConstraintSystem build_circle_impl(const Instance& inst, std::optional<double> fixed_alpha) {
  const int n = inst.n;
  const double eps = inst.epsilon;
  Builder b;
  b.sys.instance = inst;
  Layout& lay = b.sys.layout;
  lay.family = inst.family;
  lay.n = n;
  lay.container_size = fixed_alpha ? 0 : 1;
  lay.element_stride = 3;
  lay.pose_size = 2;
  lay.pair_stride = 0;
  lay.num_pairs = 0;

  Expr alpha;
  if (fixed_alpha) {
    alpha = constant(*fixed_alpha);
  } else {
    b.var("alpha", 0.0, 1.0);
    alpha = variable(0);
  }
  const double alpha_hi = fixed_alpha ? *fixed_alpha : 1.0;
  for (int i = 0; i < n; ++i) {
    b.var("x_" + std::to_string(i), 0.0, alpha_hi);
    b.var("y_" + std::to_string(i), 0.0, 2.0 - (fixed_alpha ? *fixed_alpha : 0.0));
    b.var("r_" + std::to_string(i), 0.0, alpha_hi / 2);
  }

  auto X = [&](int i) { return variable(lay.element_offset(i)); };
  auto Y = [&](int i) { return variable(lay.element_offset(i) + 1); };
  auto Rr = [&](int i) { return variable(lay.element_offset(i) + 2); };

  Expr obj = constant(0);
  for (int i = 0; i < n; ++i) obj = obj + Rr(i);
  b.set_objective(obj, /*maximize=*/true);

  const double cscale = 1 + 2 * eps;  // boundary margin
  for (int i = 0; i < n; ++i) {
    b.add_row(cscale * Rr(i) - X(i), false, Tag::containment);
    b.add_row(X(i) + cscale * Rr(i) - alpha, false, Tag::containment);
    b.add_row(cscale * Rr(i) - Y(i), false, Tag::containment);
    b.add_row(Y(i) + cscale * Rr(i) - (2.0 - alpha), false, Tag::containment);
    if (!fixed_alpha) b.add_row(Rr(i) - 0.5 * alpha, false, Tag::containment);
  }
  const double pscale = 1 + eps;  // pairwise margin
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      b.add_row(sq(pscale * (Rr(i) + Rr(j))) - sq(X(i) - X(j)) - sq(Y(i) - Y(j)), false,
                Tag::separation);
  Expr area = constant(-1.0 / kPi);
  for (int i = 0; i < n; ++i) area = area + sq(Rr(i));
  b.add_row(area, false, Tag::area);
  return std::move(b.sys);
}

ConstraintSystem build_ellipse_impl(const Instance& inst) {
  const int n = inst.n;
  const double eps = inst.epsilon;
  const EllipseOptions& opt = inst.ellipse;
  Builder b;
  b.sys.instance = inst;
  Layout& lay = b.sys.layout;
  lay.family = Family::circle_ellipse;
  lay.n = n;
  lay.container_size = 2;
  lay.element_stride = 3;
  lay.pose_size = 2;
  lay.pair_stride = 0;
  lay.num_pairs = 0;

  const double axis_hi = n + 1.0;  // any n unit circles fit in an ellipse with a <= n+1
  const double a_lo = opt.strengthening ? std::max(1.0, std::sqrt(double(n))) : 1.0;
  b.var("a", a_lo, axis_hi);
  b.var("b", 1.0, axis_hi);
  for (int i = 0; i < n; ++i) {
    b.var("x_" + std::to_string(i), -(axis_hi - 1), axis_hi - 1);
    b.var("y_" + std::to_string(i), -(axis_hi - 1), axis_hi - 1);
    b.var("t_" + std::to_string(i), 1.0, 2 * axis_hi * axis_hi + 10);
  }

  const Expr A = variable(0), B = variable(1);
  auto X = [&](int i) { return variable(lay.element_offset(i)); };
  auto Y = [&](int i) { return variable(lay.element_offset(i) + 1); };
  auto T = [&](int i) { return variable(lay.element_offset(i) + 2); };

  b.set_objective(A * B * kPi, /*maximize=*/false);

  b.add_row(B - A, false, Tag::symmetry);  // longer semi-axis horizontal

  const double pair_gap = 4 * (1 + eps) * (1 + eps);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      b.add_row(constant(pair_gap) - sq(X(i) - X(j)) - sq(Y(i) - Y(j)), false, Tag::separation);

  const double r = 1 + 2 * eps;  // circle radius inflated for solver margin
  for (int i = 0; i < n; ++i) {
    // S-lemma minor constraints; the t - b^2 >= 0 minor is implied by a >= b.
    const Expr Aq = T(i) - sq(B);
    const Expr Cq = T(i) - sq(A);
    const Expr Eq = sq(A) * sq(B) + T(i) * (sq(X(i)) + sq(Y(i)) - r * r);
    b.add_row(-Cq, false, Tag::containment);
    b.add_row(-Eq, false, Tag::containment);
    b.add_row(-(Cq * Eq - sq(T(i)) * sq(Y(i))), false, Tag::containment);
    b.add_row(-(Aq * Eq - sq(T(i)) * sq(X(i))), false, Tag::containment);
    b.add_row(-(Aq * Cq * Eq - sq(T(i)) * (sq(X(i)) * Cq + sq(Y(i)) * Aq)), false,
              Tag::containment);
  }

  if (opt.strengthening) {
    for (int i = 0; i < n; ++i) {
      b.add_row(sq(B) * sq(X(i)) + sq(A) * sq(Y(i)) - sq(A) * sq(B), false, Tag::strengthening);
      b.add_row(X(i) - (A - 1.0), false, Tag::strengthening);
      b.add_row(-X(i) - (A - 1.0), false, Tag::strengthening);
      b.add_row(Y(i) - (B - 1.0), false, Tag::strengthening);
      b.add_row(-Y(i) - (B - 1.0), false, Tag::strengthening);
    }
    b.add_row(constant(double(n)) - A * B, false, Tag::area);
  }

  switch (opt.symmetry) {
    case SymmetryMode::none: break;
    case SymmetryMode::centroid: {
      Expr sx = constant(0), sy = constant(0);
      for (int i = 0; i < n; ++i) {
        sx = sx + X(i);
        sy = sy + Y(i);
      }
      b.add_row(-sx, false, Tag::symmetry);
      b.add_row(-sy, false, Tag::symmetry);
      break;
    }
    case SymmetryMode::sort_x: {
      for (int i = 0; i + 1 < n; ++i) b.add_row(X(i) - X(i + 1), false, Tag::symmetry);
      b.add_row(-X((n + 1) / 2 - 1), false, Tag::symmetry);  // at least half on the right
      break;
    }
    case SymmetryMode::generic_line: {
      for (int i = 0; i + 1 < n; ++i)
        b.add_row(opt.line_alpha * X(i) + opt.line_beta * Y(i) - opt.line_alpha * X(i + 1) -
                      opt.line_beta * Y(i + 1),
                  false, Tag::symmetry);
      break;
    }
  }
  return std::move(b.sys);
}

ConstraintSystem build_polygon_impl(const Instance& inst) {
  const int n = inst.n, m = inst.m, l = inst.l;
  const double eps = inst.epsilon;
  const Variant variant = inst.variant;
  const RegularPolygonSpec sm = polygon_constants(m);
  const RegularPolygonSpec sl = polygon_constants(l);
  const double r_min = container_lower_bound(inst);
  const double r_ub = container_upper_bound(inst);

  Builder b;
  b.sys.instance = inst;
  Layout& lay = b.sys.layout;
  lay.family = Family::polygon;
  lay.n = n;
  lay.container_size = 1;
  lay.element_stride = 3 + 3 * m;
  lay.pose_size = 3;
  lay.num_pairs = n * (n - 1) / 2;
  lay.pair_stride = (variant == Variant::inner) ? 2 : 2 * m;

  b.var("R", r_min, r_ub);
  for (int i = 0; i < n; ++i) {
    b.var("x_" + std::to_string(i), -r_ub, r_ub);
    b.var("y_" + std::to_string(i), -r_ub, r_ub);
    b.var("theta_" + std::to_string(i), 0.0, sm.phi);
    for (int j = 0; j < m; ++j) {
      b.var(idx2("a", i, j), -1.0, 1.0);
      b.var(idx2("b", i, j), -1.0, 1.0);
      b.var(idx2("s", i, j), -r_ub - 2, r_ub + 2);
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (variant == Variant::inner) {
        b.var(idx2("sepang", i, j), 0.0, 2 * kPi);
        b.var(idx2("sepoff", i, j), -r_ub - 2, r_ub + 2);
      } else {
        const double lam_ub = (variant == Variant::farkas) ? 20.0 : 1.0;
        for (int k = 1; k <= 2 * m; ++k)
          b.var("lambda_" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(k),
                0.0, lam_ub);
      }
    }

  const Expr R = variable(0);
  auto X = [&](int i) { return variable(lay.element_offset(i)); };
  auto Y = [&](int i) { return variable(lay.element_offset(i) + 1); };
  auto Th = [&](int i) { return variable(lay.element_offset(i) + 2); };
  auto Ha = [&](int i, int j) { return variable(lay.aux_offset(i) + 3 * j); };
  auto Hb = [&](int i, int j) { return variable(lay.aux_offset(i) + 3 * j + 1); };
  auto Hs = [&](int i, int j) { return variable(lay.aux_offset(i) + 3 * j + 2); };
  auto Lam = [&](int i, int j, int k) { return variable(lay.pair_offset(i, j) + k - 1); };

  b.set_objective(R, /*maximize=*/false);

  // Containment: every (scaled) vertex inside every outer half-space.
  const double vscale = 1 + eps / sm.rho;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const Expr vx = X(i) + vscale * sin_e(Th(i) + sm.delta[j]);
      const Expr vy = Y(i) + vscale * cos_e(Th(i) + sm.delta[j]);
      for (int k = 0; k < l; ++k)
        b.add_row(-(R * sl.rho + std::sin(k * sl.phi) * vx + std::cos(k * sl.phi) * vy), false,
                  Tag::containment);
    }

  // Half-space definitions with the inradius inflated by eps/2.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      b.add_row(Ha(i, j) - sin_e(Th(i) + j * sm.phi), true, Tag::halfspace);
      b.add_row(Hb(i, j) - cos_e(Th(i) + j * sm.phi), true, Tag::halfspace);
      b.add_row(Hs(i, j) - (Ha(i, j) * X(i) + Hb(i, j) * Y(i) - (sm.rho + eps / 2)), true,
                Tag::halfspace);
    }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (variant == Variant::inner) {
        const Expr ang = variable(lay.pair_offset(i, j));
        const Expr d = variable(lay.pair_offset(i, j) + 1);
        for (int k = 0; k < m; ++k) {
          const Expr pi_x = X(i) + sin_e(Th(i) + sm.delta[k]);
          const Expr pi_y = Y(i) + cos_e(Th(i) + sm.delta[k]);
          const Expr pj_x = X(j) + sin_e(Th(j) + sm.delta[k]);
          const Expr pj_y = Y(j) + cos_e(Th(j) + sm.delta[k]);
          b.add_row(d + eps / 2 - (sin_e(ang) * pi_x + cos_e(ang) * pi_y), false, Tag::separation);
          b.add_row(sin_e(ang) * pj_x + cos_e(ang) * pj_y - d + eps / 2, false, Tag::separation);
        }
      } else {
        if (variant == Variant::farkas) {
          Expr si = constant(-1.0), sj = constant(-1.0);
          for (int k = 0; k < m; ++k) {
            si = si + Lam(i, j, k + 1);
            sj = sj + Lam(i, j, k + m + 1);
          }
          b.add_row(-si, false, Tag::farkas_sum);
          b.add_row(-sj, false, Tag::farkas_sum);
        } else {
          Expr sum = constant(-1.0);
          for (int k = 1; k <= 2 * m; ++k) sum = sum + Lam(i, j, k);
          b.add_row(sum, true, Tag::farkas_sum);
        }
        Expr cx = constant(0), cy = constant(0), off = constant(0);
        for (int k = 0; k < m; ++k) {
          cx = cx + Lam(i, j, k + 1) * Ha(i, k) + Lam(i, j, k + m + 1) * Ha(j, k);
          cy = cy + Lam(i, j, k + 1) * Hb(i, k) + Lam(i, j, k + m + 1) * Hb(j, k);
          off = off + Lam(i, j, k + 1) * Hs(i, k) + Lam(i, j, k + m + 1) * Hs(j, k);
        }
        b.add_row(cx, true, Tag::separation);
        b.add_row(cy, true, Tag::separation);
        b.add_row(-off, false, Tag::separation);
      }
      if (variant == Variant::dist || variant == Variant::sym)
        b.add_row(constant(4 * sm.rho * sm.rho) - sq(X(i) - X(j)) - sq(Y(i) - Y(j)), false,
                  Tag::distance);
    }

  if (variant == Variant::sym) {
    for (int i = 0; i + 1 < n; ++i) b.add_row(X(i) - X(i + 1), false, Tag::symmetry);
    Expr sx = constant(0), sy = constant(0);
    for (int i = 0; i < n; ++i) {
      sx = sx + X(i);
      sy = sy + Y(i);
    }
    b.add_row(-sx, false, Tag::symmetry);
    b.add_row(-(-std::cos(sl.phi / 2) * sx + std::sin(sl.phi / 2) * sy), false, Tag::symmetry);
  }
  return std::move(b.sys);
}

// Rot(theta, iota, kappa) * v as three expressions.
std::array<Expr, 3> rotation_expr(const Expr& th, const Expr& io, const Expr& ka, Vec3 v) {
  const Expr ct = cos_e(th), st = sin_e(th);
  const Expr ci = cos_e(io), si = sin_e(io);
  const Expr ck = cos_e(ka), sk = sin_e(ka);
  const Expr w1x = constant(v.x);
  const Expr w1y = ck * v.y - sk * v.z;
  const Expr w1z = sk * v.y + ck * v.z;
  const Expr w2x = ci * w1x + si * w1z;
  const Expr w2z = -(si * w1x) + ci * w1z;
  return {ct * w2x - st * w1y, st * w2x + ct * w1y, w2z};
}

ConstraintSystem build_platonic_impl(const Instance& inst) {
  const int n = inst.n;
  const double eps = inst.epsilon;
  const Variant variant = inst.variant;
  const PlatonicSpec& sm = platonic_spec(platonic_from_index(inst.m));
  const PlatonicSpec& sl = platonic_spec(platonic_from_index(inst.l));
  const int nf = static_cast<int>(sm.faces.size());
  const int nv = static_cast<int>(sm.vertices.size());
  const double r_min = container_lower_bound(inst);
  const double r_ub = container_upper_bound(inst);

  Builder b;
  b.sys.instance = inst;
  Layout& lay = b.sys.layout;
  lay.family = Family::platonic;
  lay.n = n;
  lay.container_size = 1;
  lay.element_stride = 6 + 4 * nf;
  lay.pose_size = 6;
  lay.num_pairs = n * (n - 1) / 2;
  lay.pair_stride = (variant == Variant::inner) ? 3 : 2 * nf;

  b.var("R", r_min, r_ub);
  for (int i = 0; i < n; ++i) {
    const std::string si = std::to_string(i);
    b.var("x_" + si, -r_ub, r_ub);
    b.var("y_" + si, -r_ub, r_ub);
    b.var("z_" + si, -r_ub, r_ub);
    b.var("theta_" + si, 0.0, 2 * kPi);
    b.var("iota_" + si, 0.0, 2 * kPi);
    b.var("kappa_" + si, 0.0, 2 * kPi);
    for (int f = 0; f < nf; ++f) {
      b.var(idx2("a", i, f), -1.0, 1.0);
      b.var(idx2("b", i, f), -1.0, 1.0);
      b.var(idx2("c", i, f), -1.0, 1.0);
      b.var(idx2("e", i, f), -r_ub - 2, r_ub + 2);
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (variant == Variant::inner) {
        b.var(idx2("sepang", i, j), 0.0, 2 * kPi);
        b.var(idx2("seppol", i, j), 0.0, kPi);
        b.var(idx2("sepoff", i, j), -r_ub - 2, r_ub + 2);
      } else {
        const double lam_ub = (variant == Variant::farkas) ? 20.0 : 1.0;
        for (int k = 1; k <= 2 * nf; ++k)
          b.var("lambda_" + std::to_string(i) + "_" + std::to_string(j) + "_" + std::to_string(k),
                0.0, lam_ub);
      }
    }

  const Expr R = variable(0);
  auto Pos = [&](int i, int c) { return variable(lay.element_offset(i) + c); };
  auto Ang = [&](int i, int c) { return variable(lay.element_offset(i) + 3 + c); };
  auto Hn = [&](int i, int f, int c) { return variable(lay.aux_offset(i) + 4 * f + c); };
  auto He = [&](int i, int f) { return variable(lay.aux_offset(i) + 4 * f + 3); };
  auto Lam = [&](int i, int j, int k) { return variable(lay.pair_offset(i, j) + k - 1); };

  b.set_objective(R, /*maximize=*/false);

  const double vscale = 1 + eps / sm.rho;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < nv; ++j) {
      const auto rot = rotation_expr(Ang(i, 0), Ang(i, 1), Ang(i, 2), sm.vertices[j]);
      const Expr px = Pos(i, 0) + vscale * rot[0];
      const Expr py = Pos(i, 1) + vscale * rot[1];
      const Expr pz = Pos(i, 2) + vscale * rot[2];
      for (const Vec3& nk : sl.normals)
        b.add_row(-(R * sl.rho + nk.x * px + nk.y * py + nk.z * pz), false, Tag::containment);
    }
    for (int f = 0; f < nf; ++f) {
      const auto rot = rotation_expr(Ang(i, 0), Ang(i, 1), Ang(i, 2), sm.normals[f]);
      b.add_row(Hn(i, f, 0) - rot[0], true, Tag::halfspace);
      b.add_row(Hn(i, f, 1) - rot[1], true, Tag::halfspace);
      b.add_row(Hn(i, f, 2) - rot[2], true, Tag::halfspace);
      b.add_row(He(i, f) - (Hn(i, f, 0) * Pos(i, 0) + Hn(i, f, 1) * Pos(i, 1) +
                            Hn(i, f, 2) * Pos(i, 2) - (sm.rho + eps / 2)),
                true, Tag::halfspace);
    }
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (variant == Variant::inner) {
        const Expr az = variable(lay.pair_offset(i, j));
        const Expr pol = variable(lay.pair_offset(i, j) + 1);
        const Expr d = variable(lay.pair_offset(i, j) + 2);
        const Expr ux = sin_e(pol) * sin_e(az);
        const Expr uy = sin_e(pol) * cos_e(az);
        const Expr uz = cos_e(pol);
        for (int k = 0; k < nv; ++k) {
          const auto ri = rotation_expr(Ang(i, 0), Ang(i, 1), Ang(i, 2), sm.vertices[k]);
          const auto rj = rotation_expr(Ang(j, 0), Ang(j, 1), Ang(j, 2), sm.vertices[k]);
          const Expr qi = ux * (Pos(i, 0) + ri[0]) + uy * (Pos(i, 1) + ri[1]) +
                          uz * (Pos(i, 2) + ri[2]);
          const Expr qj = ux * (Pos(j, 0) + rj[0]) + uy * (Pos(j, 1) + rj[1]) +
                          uz * (Pos(j, 2) + rj[2]);
          b.add_row(d + eps / 2 - qi, false, Tag::separation);
          b.add_row(qj - d + eps / 2, false, Tag::separation);
        }
      } else {
        if (variant == Variant::farkas) {
          Expr si = constant(-1.0), sj = constant(-1.0);
          for (int k = 0; k < nf; ++k) {
            si = si + Lam(i, j, k + 1);
            sj = sj + Lam(i, j, k + nf + 1);
          }
          b.add_row(-si, false, Tag::farkas_sum);
          b.add_row(-sj, false, Tag::farkas_sum);
        } else {
          Expr sum = constant(-1.0);
          for (int k = 1; k <= 2 * nf; ++k) sum = sum + Lam(i, j, k);
          b.add_row(sum, true, Tag::farkas_sum);
        }
        for (int c = 0; c < 3; ++c) {
          Expr cc = constant(0);
          for (int k = 0; k < nf; ++k)
            cc = cc + Lam(i, j, k + 1) * Hn(i, k, c) + Lam(i, j, k + nf + 1) * Hn(j, k, c);
          b.add_row(cc, true, Tag::separation);
        }
        Expr off = constant(0);
        for (int k = 0; k < nf; ++k)
          off = off + Lam(i, j, k + 1) * He(i, k) + Lam(i, j, k + nf + 1) * He(j, k);
        b.add_row(-off, false, Tag::separation);
      }
      if (variant == Variant::dist || variant == Variant::sym)
        b.add_row(constant(4 * sm.rho * sm.rho) - sq(Pos(i, 0) - Pos(j, 0)) -
                      sq(Pos(i, 1) - Pos(j, 1)) - sq(Pos(i, 2) - Pos(j, 2)),
                  false, Tag::distance);
    }

  if (variant == Variant::sym) {
    for (int i = 0; i + 1 < n; ++i) b.add_row(Pos(i, 0) - Pos(i + 1, 0), false, Tag::symmetry);
    // Centroid cone in the xy-plane, sector angle from the outer solid's
    // first face cycle length.
    const double sector = 2 * kPi / sl.faces.front().size();
    Expr sx = constant(0), sy = constant(0);
    for (int i = 0; i < n; ++i) {
      sx = sx + Pos(i, 0);
      sy = sy + Pos(i, 1);
    }
    b.add_row(-sx, false, Tag::symmetry);
    b.add_row(-(-std::cos(sector / 2) * sx + std::sin(sector / 2) * sy), false, Tag::symmetry);
  }
  return std::move(b.sys);
}

}  // namespace

Layout make_layout(const Instance& instance) {
  instance.validate();
  Layout lay;
  lay.family = instance.family;
  lay.n = instance.n;
  switch (instance.family) {
    case Family::circle_square:
    case Family::circle_rect:
      lay.container_size = instance.family == Family::circle_rect ? 1 : 0;
      lay.element_stride = 3;
      lay.pose_size = 2;
      break;
    case Family::circle_ellipse:
      lay.container_size = 2;
      lay.element_stride = 3;
      lay.pose_size = 2;
      break;
    case Family::polygon:
      lay.container_size = 1;
      lay.element_stride = 3 + 3 * instance.m;
      lay.pose_size = 3;
      lay.num_pairs = instance.n * (instance.n - 1) / 2;
      lay.pair_stride = instance.variant == Variant::inner ? 2 : 2 * instance.m;
      break;
    case Family::platonic: {
      const int nf = static_cast<int>(platonic_spec(platonic_from_index(instance.m)).faces.size());
      lay.container_size = 1;
      lay.element_stride = 6 + 4 * nf;
      lay.pose_size = 6;
      lay.num_pairs = instance.n * (instance.n - 1) / 2;
      lay.pair_stride = instance.variant == Variant::inner ? 3 : 2 * nf;
      break;
    }
  }
  return lay;
}

ConstraintSystem build_system(const Instance& instance) {
  instance.validate();
  switch (instance.family) {
    case Family::circle_square: return build_circle_impl(instance, 1.0);
    case Family::circle_rect: return build_circle_impl(instance, std::nullopt);
    case Family::circle_ellipse: return build_ellipse_impl(instance);
    case Family::polygon: return build_polygon_impl(instance);
    case Family::platonic: return build_platonic_impl(instance);
  }
  throw InvalidInstanceError("unknown family");
}

ConstraintSystem build_circle(int n, std::optional<double> fixed_alpha, double epsilon) {
  if (fixed_alpha && (*fixed_alpha <= 0 || *fixed_alpha > 1))
    throw InvalidInstanceError("fixed alpha must be in (0, 1]");
  Instance inst;
  inst.family = fixed_alpha ? Family::circle_square : Family::circle_rect;
  inst.n = n;
  inst.epsilon = epsilon;
  inst.validate();
  return build_circle_impl(inst, fixed_alpha);
}

ConstraintSystem build_ellipse(int n, const EllipseOptions& options, double epsilon) {
  Instance inst;
  inst.family = Family::circle_ellipse;
  inst.n = n;
  inst.epsilon = epsilon;
  inst.ellipse = options;
  inst.validate();
  return build_ellipse_impl(inst);
}

ConstraintSystem build_polygon(int l, int m, int n, Variant variant, double epsilon) {
  Instance inst;
  inst.family = Family::polygon;
  inst.n = n;
  inst.m = m;
  inst.l = l;
  inst.variant = variant;
  inst.epsilon = epsilon;
  inst.validate();
  return build_polygon_impl(inst);
}

ConstraintSystem build_platonic(int l, int m, int n, Variant variant, double epsilon) {
  Instance inst;
  inst.family = Family::platonic;
  inst.n = n;
  inst.m = m;
  inst.l = l;
  inst.variant = variant;
  inst.epsilon = epsilon;
  inst.validate();
  return build_platonic_impl(inst);
}

void tighten_ellipse_bounds(const Instance& instance, double incumbent_area,
                            std::vector<double>& lb, std::vector<double>& ub) {
  if (instance.family != Family::circle_ellipse) return;
  const double axis_cap = incumbent_area / kPi;
  ub[0] = std::min(ub[0], axis_cap);
  ub[1] = std::min(ub[1], axis_cap);
  Layout lay;
  lay.family = Family::circle_ellipse;
  lay.n = instance.n;
  lay.container_size = 2;
  lay.element_stride = 3;
  lay.pose_size = 2;
  for (int i = 0; i < instance.n; ++i) {
    const int off = lay.element_offset(i);
    ub[off] = std::min(ub[off], ub[0] - 1);
    lb[off] = std::max(lb[off], -(ub[0] - 1));
    ub[off + 1] = std::min(ub[off + 1], ub[1] - 1);
    lb[off + 1] = std::max(lb[off + 1], -(ub[1] - 1));
  }
}

}  // namespace packing
