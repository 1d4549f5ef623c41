#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "packing/model.hpp"

namespace packing {

struct PolishError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PolishReport {
  double sigma = 1;  // uniform center scale (bodies, ellipse)
  double delta = 0;  // uniform radius increase (circles, phase 1)
  std::vector<double> radius_increments;  // circles, phase 2
  double objective_before = 0;
  double objective_after = 0;
  double margin_consumed = 0;  // slack left on the tightest constraint before polishing
  bool verified = false;       // passes verify at tolerance 0 after polishing
};

/// High-precision feasibility restoration: removes solver tolerance slack so
/// the rounded double-precision solution is exactly feasible. Rotation angles
/// are never touched. Inputs must be approximately feasible (max geometric
/// residual <= 1e-6).
std::pair<Solution, PolishReport> polish(const Instance& instance, const Solution& sol);

std::pair<Solution, PolishReport> polish_bodies(const Instance& instance, const Solution& sol);
std::pair<Solution, PolishReport> polish_circles(const Instance& instance, const Solution& sol);
std::pair<Solution, PolishReport> polish_ellipse(const Instance& instance, const Solution& sol);

}  // namespace packing
