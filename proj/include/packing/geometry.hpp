#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace packing {

struct Vec2 {
  double x = 0, y = 0;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(Vec2 a);
double norm(Vec3 a);

/// Center position plus rotation angle for a 2D regular polygon.
struct Pose2 {
  double x = 0, y = 0, theta = 0;
};

/// Center position plus ZYX rotation angles for a 3D solid.
struct Pose3 {
  double x = 0, y = 0, z = 0;
  double theta = 0, iota = 0, kappa = 0;
};

struct InvalidShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Constants of the regular m-gon with unit circumradius.
///
/// Vertex j sits in direction (sin(delta[j]), cos(delta[j])) from the center;
/// the inward normal of edge j is (sin(j*phi), cos(j*phi)) with the edge on
/// the line n.(p - c) = -rho.
struct RegularPolygonSpec {
  int m = 0;
  double rho = 0;  // inradius, cos(pi/m)
  double phi = 0;  // angular spacing 2*pi/m
  std::vector<double> delta;

  static RegularPolygonSpec make(int m);
};

enum class PlatonicKind : int {
  tetrahedron = 1,
  octahedron = 2,
  cube = 3,
  icosahedron = 4,
  dodecahedron = 5,
};

const char* platonic_name(PlatonicKind kind);
PlatonicKind platonic_from_index(int index);  // 1..5 per the type numbering

/// Vertex/face/normal tables of a Platonic solid with unit circumradius.
///
/// Normals point inward: for every vertex v on face f, normals[f].v = -rho.
struct PlatonicSpec {
  PlatonicKind kind;
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;  // ordered vertex-index cycles
  std::vector<Vec3> normals;            // inward unit normals, one per face
  std::vector<std::array<int, 2>> edges;
  std::vector<Vec3> edge_dirs;  // unique edge directions (up to sign), unit
  double rho = 0;
  double volume = 0;

  static const PlatonicSpec& get(PlatonicKind kind);
};

RegularPolygonSpec polygon_constants(int m);
const PlatonicSpec& platonic_spec(PlatonicKind kind);

Vec3 rotate_zyx(const Pose3& p, Vec3 v);
/// Columns are d(Rot*v)/dtheta, d(Rot*v)/diota, d(Rot*v)/dkappa.
std::array<Vec3, 3> rotate_zyx_jacobian(const Pose3& p, Vec3 v);

Vec2 polygon_vertex(const Pose2& p, const RegularPolygonSpec& spec, int j);
Vec3 solid_vertex(const Pose3& p, const PlatonicSpec& spec, int j);

struct Halfspace2 {
  double a = 0, b = 0, s = 0;  // interior: a*X + b*Y > s
};
struct Halfspace3 {
  double a = 0, b = 0, c = 0, e = 0;  // interior: a*X + b*Y + c*Z > e
};

Halfspace2 polygon_halfspace(const Pose2& p, const RegularPolygonSpec& spec, int j);
Halfspace3 solid_halfspace(const Pose3& p, const PlatonicSpec& spec, int f);

struct SatResult2 {
  double margin = 0;
  Vec2 axis;  // oriented so body b lies on the positive side
};
struct SatResult3 {
  double margin = 0;
  Vec3 axis;
};

/// Best separation gap over the edge normals of both polygons.
/// margin >= 0 iff the interiors are disjoint.
SatResult2 sat_margin_2d(const Pose2& pa, const Pose2& pb, const RegularPolygonSpec& spec);

/// As in 2D with face normals of both solids plus edge-edge cross products.
/// Near-parallel edge pairs (cross norm < 1e-12) are skipped.
SatResult3 sat_margin_3d(const Pose3& pa, const Pose3& pb, const PlatonicSpec& spec);

/// SAT margin together with its (sub)gradient with respect to the two poses,
/// taken at the active axis and active vertices.
struct SatGrad2 {
  double margin = 0;
  Vec2 axis;
  std::array<double, 3> grad_a{};  // d margin / d (x, y, theta) of pose a
  std::array<double, 3> grad_b{};
};
struct SatGrad3 {
  double margin = 0;
  Vec3 axis;
  std::array<double, 6> grad_a{};  // d margin / d (x, y, z, theta, iota, kappa)
  std::array<double, 6> grad_b{};
};

SatGrad2 sat_margin_grad_2d(const Pose2& pa, const Pose2& pb, const RegularPolygonSpec& spec);
SatGrad3 sat_margin_grad_3d(const Pose3& pa, const Pose3& pb, const PlatonicSpec& spec);

}  // namespace packing
