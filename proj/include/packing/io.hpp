#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "packing/certify.hpp"
#include "packing/model.hpp"

namespace packing {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solution plus its instance descriptor and optional certificates, as stored
/// on disk. Doubles are written as 17-significant-digit decimals and
/// round-trip bit-exactly.
struct SolutionDocument {
  Instance instance;
  Solution solution;
  std::vector<FarkasCertificate> farkas;
  std::vector<SLemmaCertificate> slemma;
};

std::string write_solution(const SolutionDocument& doc);
SolutionDocument read_solution(const std::string& text);

/// Solver-agnostic algebraic model: variables with bounds plus objective and
/// constraint expression trees over {+, -, *, integer power, sin, cos}.
struct ExportedModel {
  struct Row {
    Expr expr;  // feasible iff expr <= 0 (== 0 for equalities)
    bool equality = false;
    std::string tag;
  };
  Instance instance;
  bool maximize = false;
  std::vector<std::string> var_names;
  std::vector<double> lb, ub;
  Expr objective;
  std::vector<Row> rows;
};

std::string export_model(const Instance& instance);
ExportedModel read_model(const std::string& text);

/// 2D families only: container outline plus indexed inner shapes.
std::string render_svg(const Instance& instance, const Solution& sol);
/// Platonic family only: container wireframe plus triangulated inner meshes.
std::string render_obj(const Instance& instance, const Solution& sol);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace packing
