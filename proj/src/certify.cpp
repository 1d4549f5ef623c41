#include "packing/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace packing {

namespace {
constexpr double kSumTol = 1e-10;
constexpr double kCancelTol = 1e-10;
constexpr double kGapTol = 1e-12;
}  // namespace

LpResult simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                     const std::vector<double>& c) {
  const int rows = static_cast<int>(A.size());
  const int cols = static_cast<int>(c.size());
  // Tableau over structural + artificial columns; phase 1 minimizes the
  // artificial sum, phase 2 maximizes c.x. Bland's rule throughout.
  const int total = cols + rows;
  std::vector<std::vector<double>> tab(rows, std::vector<double>(total + 1, 0.0));
  std::vector<int> basis(rows);
  for (int r = 0; r < rows; ++r) {
    const double sign = (b[r] < 0) ? -1.0 : 1.0;
    for (int k = 0; k < cols; ++k) tab[r][k] = sign * A[r][k];
    tab[r][cols + r] = 1.0;
    tab[r][total] = sign * b[r];
    basis[r] = cols + r;
  }

  auto pivot = [&](int pr, int pc) {
    const double pv = tab[pr][pc];
    for (double& v : tab[pr]) v /= pv;
    for (int r = 0; r < rows; ++r) {
      if (r == pr) continue;
      const double f = tab[r][pc];
      if (f == 0) continue;
      for (int k = 0; k <= total; ++k) tab[r][k] -= f * tab[pr][k];
    }
    basis[pr] = pc;
  };

  auto run = [&](const std::vector<double>& obj, bool allow_artificial) -> bool {
    // Returns false when unbounded.
    for (int iter = 0; iter < 10000; ++iter) {
      // reduced costs: obj[k] - sum over basis rows of obj[basis[r]] * tab[r][k]
      int enter = -1;
      for (int k = 0; k < total; ++k) {
        if (!allow_artificial && k >= cols) continue;
        bool basic = false;
        for (int r = 0; r < rows; ++r)
          if (basis[r] == k) basic = true;
        if (basic) continue;
        double red = obj[k];
        for (int r = 0; r < rows; ++r) red -= obj[basis[r]] * tab[r][k];
        if (red > 1e-11) {
          enter = k;  // Bland: first improving index
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows; ++r) {
        if (tab[r][enter] > 1e-12) {
          const double ratio = tab[r][total] / tab[r][enter];
          if (ratio < best_ratio - 1e-15 ||
              (std::abs(ratio - best_ratio) <= 1e-15 &&
               (leave < 0 || basis[r] < basis[leave]))) {
            best_ratio = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    return true;
  };

  LpResult out;
  std::vector<double> phase1(total, 0.0);
  for (int r = 0; r < rows; ++r) phase1[cols + r] = -1.0;
  run(phase1, true);
  double art = 0;
  for (int r = 0; r < rows; ++r)
    if (basis[r] >= cols) art += tab[r][total];
  if (art > 1e-9) {
    out.feasible = false;
    return out;
  }
  // Drive remaining (zero-valued) artificials out of the basis if possible.
  for (int r = 0; r < rows; ++r) {
    if (basis[r] < cols) continue;
    for (int k = 0; k < cols; ++k)
      if (std::abs(tab[r][k]) > 1e-9) {
        pivot(r, k);
        break;
      }
  }

  std::vector<double> phase2(total, 0.0);
  for (int k = 0; k < cols; ++k) phase2[k] = c[k];
  out.bounded = run(phase2, false);
  out.feasible = true;
  out.x.assign(cols, 0.0);
  for (int r = 0; r < rows; ++r)
    if (basis[r] < cols) out.x[basis[r]] = tab[r][total];
  out.objective = 0;
  for (int k = 0; k < cols; ++k) out.objective += c[k] * out.x[k];
  return out;
}

namespace {

// One body's LP of the reverse mapping: max mu.s subject to
// sum mu_k * normal_k = target, mu >= 0.
std::vector<double> reverse_lp(const std::vector<std::vector<double>>& normals,
                               const std::vector<double>& offsets,
                               const std::vector<double>& target) {
  const int dim = static_cast<int>(target.size());
  const int m = static_cast<int>(normals.size());
  std::vector<std::vector<double>> A(dim, std::vector<double>(m));
  for (int r = 0; r < dim; ++r)
    for (int k = 0; k < m; ++k) A[r][k] = normals[k][r];
  const LpResult lp = simplex_max(A, target, offsets);
  if (!lp.feasible) throw CertificateError("axis not representable by body normals");
  return lp.x;
}

FarkasCertificate combine(std::vector<double> mu, std::vector<double> nu,
                          const std::vector<std::vector<double>>& normals_i,
                          const std::vector<std::vector<double>>& normals_j,
                          const std::vector<double>& offsets_i,
                          const std::vector<double>& offsets_j, std::vector<double> axis) {
  FarkasCertificate cert;
  double gap = 0, total = 0;
  for (size_t k = 0; k < mu.size(); ++k) {
    gap += mu[k] * offsets_i[k] + nu[k] * offsets_j[k];
    total += mu[k] + nu[k];
  }
  if (total <= 0) throw CertificateError("degenerate multiplier sum");
  cert.lambdas.reserve(mu.size() + nu.size());
  for (double v : mu) cert.lambdas.push_back(v / total);
  for (double v : nu) cert.lambdas.push_back(v / total);
  cert.axis = std::move(axis);
  cert.offset_gap = gap;
  (void)normals_i;
  (void)normals_j;
  return cert;
}

bool check_impl(const FarkasCertificate& cert, const std::vector<std::vector<double>>& normals_i,
                const std::vector<std::vector<double>>& normals_j,
                const std::vector<double>& offsets_i, const std::vector<double>& offsets_j) {
  const size_t m = normals_i.size();
  if (cert.lambdas.size() != 2 * m) return false;
  const size_t dim = normals_i.front().size();
  double sum = 0, gap = 0;
  std::vector<double> cancel(dim, 0.0);
  for (size_t k = 0; k < m; ++k) {
    const double li = cert.lambdas[k], lj = cert.lambdas[k + m];
    if (li < -kGapTol || lj < -kGapTol) return false;
    sum += li + lj;
    gap += li * offsets_i[k] + lj * offsets_j[k];
    for (size_t d = 0; d < dim; ++d) cancel[d] += li * normals_i[k][d] + lj * normals_j[k][d];
  }
  if (std::abs(sum - 1.0) > kSumTol) return false;
  double cn = 0;
  for (double v : cancel) cn += v * v;
  if (std::sqrt(cn) > kCancelTol) return false;
  return gap >= -kGapTol;
}

}  // namespace

FarkasCertificate farkas_from_axis(const Pose2& pose_i, const Pose2& pose_j,
                                   const RegularPolygonSpec& spec, Vec2 axis) {
  const int m = spec.m;
  std::vector<std::vector<double>> ni(m), nj(m);
  std::vector<double> si(m), sj(m);
  for (int k = 0; k < m; ++k) {
    const Halfspace2 hi = polygon_halfspace(pose_i, spec, k);
    const Halfspace2 hj = polygon_halfspace(pose_j, spec, k);
    ni[k] = {hi.a, hi.b};
    si[k] = hi.s;
    nj[k] = {hj.a, hj.b};
    sj[k] = hj.s;
  }
  auto mu = reverse_lp(ni, si, {-axis.x, -axis.y});
  auto nu = reverse_lp(nj, sj, {axis.x, axis.y});
  return combine(std::move(mu), std::move(nu), ni, nj, si, sj, {axis.x, axis.y});
}

FarkasCertificate farkas_from_axis(const Pose3& pose_i, const Pose3& pose_j,
                                   const PlatonicSpec& spec, Vec3 axis) {
  const int nf = static_cast<int>(spec.faces.size());
  std::vector<std::vector<double>> ni(nf), nj(nf);
  std::vector<double> si(nf), sj(nf);
  for (int f = 0; f < nf; ++f) {
    const Halfspace3 hi = solid_halfspace(pose_i, spec, f);
    const Halfspace3 hj = solid_halfspace(pose_j, spec, f);
    ni[f] = {hi.a, hi.b, hi.c};
    si[f] = hi.e;
    nj[f] = {hj.a, hj.b, hj.c};
    sj[f] = hj.e;
  }
  auto mu = reverse_lp(ni, si, {-axis.x, -axis.y, -axis.z});
  auto nu = reverse_lp(nj, sj, {axis.x, axis.y, axis.z});
  return combine(std::move(mu), std::move(nu), ni, nj, si, sj, {axis.x, axis.y, axis.z});
}

bool farkas_check(const FarkasCertificate& cert, const Pose2& pose_i, const Pose2& pose_j,
                  const RegularPolygonSpec& spec) {
  const int m = spec.m;
  std::vector<std::vector<double>> ni(m), nj(m);
  std::vector<double> si(m), sj(m);
  for (int k = 0; k < m; ++k) {
    const Halfspace2 hi = polygon_halfspace(pose_i, spec, k);
    const Halfspace2 hj = polygon_halfspace(pose_j, spec, k);
    ni[k] = {hi.a, hi.b};
    si[k] = hi.s;
    nj[k] = {hj.a, hj.b};
    sj[k] = hj.s;
  }
  return check_impl(cert, ni, nj, si, sj);
}

bool farkas_check(const FarkasCertificate& cert, const Pose3& pose_i, const Pose3& pose_j,
                  const PlatonicSpec& spec) {
  const int nf = static_cast<int>(spec.faces.size());
  std::vector<std::vector<double>> ni(nf), nj(nf);
  std::vector<double> si(nf), sj(nf);
  for (int f = 0; f < nf; ++f) {
    const Halfspace3 hi = solid_halfspace(pose_i, spec, f);
    const Halfspace3 hj = solid_halfspace(pose_j, spec, f);
    ni[f] = {hi.a, hi.b, hi.c};
    si[f] = hi.e;
    nj[f] = {hj.a, hj.b, hj.c};
    sj[f] = hj.e;
  }
  return check_impl(cert, ni, nj, si, sj);
}

namespace {

struct Minors {
  double A, B, C, D, E;
  std::array<double, 5> values;  // C, E, C*E - D^2, A*E - B^2, det
  double min_value;
};

Minors eval_minors(double t, double a, double b, double x0, double y0, double r) {
  Minors mm{};
  mm.A = t - b * b;
  mm.B = -t * x0;
  mm.C = t - a * a;
  mm.D = -t * y0;
  mm.E = a * a * b * b + t * (x0 * x0 + y0 * y0 - r * r);
  mm.values[0] = mm.C;
  mm.values[1] = mm.E;
  mm.values[2] = mm.C * mm.E - mm.D * mm.D;
  mm.values[3] = mm.A * mm.E - mm.B * mm.B;
  mm.values[4] = mm.A * mm.C * mm.E - mm.A * mm.D * mm.D - mm.C * mm.B * mm.B;
  mm.min_value = *std::min_element(mm.values.begin(), mm.values.end());
  return mm;
}

// Real roots of c3 t^3 + c2 t^2 + c1 t + c0, ascending.
std::vector<double> cubic_roots(double c3, double c2, double c1, double c0) {
  std::vector<double> roots;
  const double p = c2 / c3, q = c1 / c3, s = c0 / c3;
  // depressed: u^3 + pu*u + qu with t = u - p/3
  const double pu = q - p * p / 3;
  const double qu = 2 * p * p * p / 27 - p * q / 3 + s;
  const double shift = -p / 3;
  const double disc = qu * qu / 4 + pu * pu * pu / 27;
  if (disc > 1e-300) {
    const double w = std::sqrt(disc);
    const double u = std::cbrt(-qu / 2 + w) + std::cbrt(-qu / 2 - w);
    roots.push_back(u + shift);
  } else {
    const double rr = std::sqrt(std::max(0.0, -pu / 3));
    if (rr == 0) {
      roots.push_back(shift);
    } else {
      const double arg = std::clamp(3 * qu / (2 * pu * rr), -1.0, 1.0);
      const double ang = std::acos(arg) / 3;
      for (int k = 0; k < 3; ++k)
        roots.push_back(2 * rr * std::cos(ang - 2 * std::numbers::pi * k / 3) + shift);
    }
  }
  // Safeguarded Newton polish.
  auto f = [&](double t) { return ((c3 * t + c2) * t + c1) * t + c0; };
  auto fp = [&](double t) { return (3 * c3 * t + 2 * c2) * t + c1; };
  for (double& t : roots)
    for (int it = 0; it < 50; ++it) {
      const double d = fp(t);
      if (std::abs(d) < 1e-300) break;
      const double step = f(t) / d;
      t -= step;
      if (std::abs(step) < 1e-13 * (1 + std::abs(t))) break;
    }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

std::optional<SLemmaCertificate> slemma_contains(double a, double b, double x0, double y0,
                                                 double r) {
  if (!(a >= b) || !(b > 0) || !(r > 0)) return std::nullopt;
  const double q = x0 * x0 + y0 * y0;
  // det(t) as a cubic in t; the leading coefficient is exactly -r^2.
  const double a2 = a * a, b2 = b * b;
  // (t-b2)(t-a2)(a2*b2 + t*(q - r^2)) - t^2*(x0^2*(t-a2) + y0^2*(t-b2))
  const double k = q - r * r;
  const double c3 = k - q;  // = -r^2
  const double c2 = a2 * b2 - (a2 + b2) * k + x0 * x0 * a2 + y0 * y0 * b2;
  const double c1 = -(a2 + b2) * a2 * b2 + a2 * b2 * k;
  const double c0 = a2 * b2 * a2 * b2;

  const double lo = a2;
  std::vector<double> candidates;
  const auto roots = cubic_roots(c3, c2, c1, c0);
  for (double t : roots)
    if (t >= lo - 1e-9) candidates.push_back(std::max(t, lo));
  // Midpoints of intervals between lo and consecutive roots where the
  // determinant can be positive.
  std::vector<double> pts{lo};
  for (double t : roots)
    if (t > lo) pts.push_back(t);
  std::sort(pts.begin(), pts.end());
  for (size_t i = 0; i + 1 < pts.size(); ++i) candidates.push_back((pts[i] + pts[i + 1]) / 2);
  candidates.push_back(lo);

  std::optional<SLemmaCertificate> fallback;
  for (double t : candidates) {
    const Minors mm = eval_minors(t, a, b, x0, y0, r);
    if (mm.min_value >= -1e-12) {
      SLemmaCertificate cert;
      cert.t = t;
      cert.minors = mm.values;
      if (t >= 1) return cert;  // prefer certificates the model accepts
      if (!fallback) fallback = cert;
    }
  }
  return fallback;
}

bool slemma_check(const SLemmaCertificate& cert, double a, double b, double x0, double y0,
                  double r) {
  if (!(cert.t >= 1)) return false;
  const Minors mm = eval_minors(cert.t, a, b, x0, y0, r);
  return mm.min_value >= -1e-12;
}

}  // namespace packing
