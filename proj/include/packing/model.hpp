#pragma once

#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "packing/expr.hpp"
#include "packing/geometry.hpp"

namespace packing {

enum class Family { circle_square, circle_rect, circle_ellipse, polygon, platonic };
enum class Variant { dist, nodist, inner, farkas, sym };
enum class SymmetryMode { none, centroid, sort_x, generic_line };

const char* family_name(Family f);
const char* variant_name(Variant v);
std::optional<Family> family_from_name(const std::string& s);
std::optional<Variant> variant_from_name(const std::string& s);

struct EllipseOptions {
  bool strengthening = true;
  SymmetryMode symmetry = SymmetryMode::none;
  double line_alpha = 2, line_beta = 3;  // generic-line ordering coefficients
};

/// One packing problem.
struct Instance {
  Family family = Family::circle_square;
  int n = 1;
  int m = 0;  // inner polygon order, or Platonic type index 1..5
  int l = 0;  // outer polygon order, or Platonic type index 1..5
  Variant variant = Variant::dist;
  double epsilon = 1e-8;
  EllipseOptions ellipse;

  std::string id() const;
  void validate() const;
  bool is_circle() const { return family == Family::circle_square || family == Family::circle_rect; }
  bool is_body() const { return family == Family::polygon || family == Family::platonic; }
};

struct InvalidInstanceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic flat variable layout: container block, then one block per
/// element (pose followed by auxiliary variables), then one block per pair
/// in lexicographic (i < j) order.
struct Layout {
  Family family = Family::circle_square;
  int n = 0;
  int container_size = 0;
  int element_stride = 0;
  int pose_size = 0;  // leading pose entries inside an element block
  int pair_stride = 0;
  int num_pairs = 0;

  int size() const { return container_size + n * element_stride + num_pairs * pair_stride; }
  int element_offset(int i) const { return container_size + i * element_stride; }
  int aux_offset(int i) const { return element_offset(i) + pose_size; }
  int pair_index(int i, int j) const;  // lexicographic rank of (i, j), i < j
  int pair_offset(int i, int j) const {
    return container_size + n * element_stride + pair_index(i, j) * pair_stride;
  }
};

enum class Tag {
  containment,
  separation,
  farkas_sum,
  distance,
  symmetry,
  area,
  strengthening,
  halfspace,
};
const char* tag_name(Tag t);

struct ResidualRow {
  Expr expr;            // feasible iff expr <= 0 (or == 0 for equalities)
  bool equality = false;
  Tag tag = Tag::containment;
  Tape tape;
  std::vector<std::pair<int, Tape>> grad;  // (variable index, d expr / d var)
};

struct EvalScratch {
  std::vector<double> stack;
};

/// Objective, inequality residuals, bounds and analytic Jacobian for one
/// instance. Immutable after build; evaluation is reentrant via the
/// caller-owned scratch.
struct ConstraintSystem {
  Instance instance;
  Layout layout;
  bool maximize = false;
  Expr objective_expr;
  Tape objective_tape;
  std::vector<std::pair<int, Tape>> objective_grad;
  std::vector<ResidualRow> rows;
  std::vector<double> lb, ub;
  std::vector<std::string> var_names;

  int dim() const { return layout.size(); }
  void check_dim(std::span<const double> x) const;

  void residuals(std::span<const double> x, std::vector<double>& out, EvalScratch& scratch) const;
  double objective(std::span<const double> x, EvalScratch& scratch) const;
  void objective_gradient(std::span<const double> x, std::vector<double>& grad,
                          EvalScratch& scratch) const;
  /// grad += sum_k w[k] * grad(row k); w.size() == rows.size()
  void add_weighted_jacobian(std::span<const double> x, std::span<const double> w,
                             std::vector<double>& grad, EvalScratch& scratch) const;
  /// Sparse Jacobian in (row, col, value) triplets.
  void jacobian(std::span<const double> x, std::vector<std::tuple<int, int, double>>& out,
                EvalScratch& scratch) const;

  Pose2 pose2(std::span<const double> x, int i) const;
  Pose3 pose3(std::span<const double> x, int i) const;
};

ConstraintSystem build_system(const Instance& instance);

/// The variable layout of an instance without building the expression rows.
Layout make_layout(const Instance& instance);

ConstraintSystem build_circle(int n, std::optional<double> fixed_alpha, double epsilon = 1e-8);
ConstraintSystem build_ellipse(int n, const EllipseOptions& options, double epsilon = 1e-8);
ConstraintSystem build_polygon(int l, int m, int n, Variant variant, double epsilon = 1e-8);
ConstraintSystem build_platonic(int l, int m, int n, Variant variant, double epsilon = 1e-8);

/// Analytic container lower bound (area / volume argument).
double container_lower_bound(const Instance& instance);
/// Generous finite upper bound used for variable boxes and start sampling.
double container_upper_bound(const Instance& instance);

/// Shrinks the ellipse semi-axis boxes once an incumbent area is known.
void tighten_ellipse_bounds(const Instance& instance, double incumbent_area,
                            std::vector<double>& lb, std::vector<double>& ub);

struct SolutionMeta {
  std::uint64_t seed = 0;
  int restarts_used = 0;
  bool polished = false;
  double wall_time = 0;
};

struct Solution {
  std::string instance_id;
  std::vector<double> values;
  double objective = 0;
  SolutionMeta meta;
};

}  // namespace packing
