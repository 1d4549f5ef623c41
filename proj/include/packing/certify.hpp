#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "packing/geometry.hpp"

namespace packing {

struct CertificateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Small dense LP: max c.x subject to A x = b, x >= 0.
/// Two-phase tableau simplex with Bland's rule; deterministic.
struct LpResult {
  bool feasible = false;
  bool bounded = true;
  double objective = 0;
  std::vector<double> x;
};
LpResult simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                     const std::vector<double>& c);

/// Nonnegative multipliers on the two bodies' half-space inequalities whose
/// normals cancel and whose offsets sum to a nonnegative gap.
struct FarkasCertificate {
  int i = 0, j = 0;
  std::vector<double> lambdas;  // 2m (2D) or 2|F| (3D), sums to one
  std::vector<double> axis;     // unit separating direction, body j side positive
  double offset_gap = 0;        // unnormalized separation gap sum
};

FarkasCertificate farkas_from_axis(const Pose2& pose_i, const Pose2& pose_j,
                                   const RegularPolygonSpec& spec, Vec2 axis);
FarkasCertificate farkas_from_axis(const Pose3& pose_i, const Pose3& pose_j,
                                   const PlatonicSpec& spec, Vec3 axis);

bool farkas_check(const FarkasCertificate& cert, const Pose2& pose_i, const Pose2& pose_j,
                  const RegularPolygonSpec& spec);
bool farkas_check(const FarkasCertificate& cert, const Pose3& pose_i, const Pose3& pose_j,
                  const PlatonicSpec& spec);

/// S-lemma multiplier certifying that a circle lies inside an axis-aligned,
/// origin-centered ellipse, together with the evaluated minor values.
struct SLemmaCertificate {
  int circle = 0;
  double t = 0;
  std::array<double, 5> minors{};  // C, E, C*E - D^2, A*E - B^2, determinant
};

std::optional<SLemmaCertificate> slemma_contains(double a, double b, double x0, double y0,
                                                 double r);
bool slemma_check(const SLemmaCertificate& cert, double a, double b, double x0, double y0,
                  double r);

}  // namespace packing
