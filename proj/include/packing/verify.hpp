#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "packing/model.hpp"

namespace packing {

struct MalformedSolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VerifyReport {
  bool feasible = false;
  double worst_residual = 0;  // feasible iff worst_residual <= tolerance
  std::string worst_tag;
  double objective = 0;
  std::optional<double> registry_delta;  // objective minus best published value
  bool area_cut_ok = true;  // circle families: the area relaxation, reported separately
};

/// Pure double-precision geometric feasibility check at epsilon = 0.
/// Polygon/platonic pairs are judged by SAT margins, ellipse containment by
/// S-lemma certificate existence.
VerifyReport verify(const Instance& instance, const Solution& sol, double tolerance = 0);

struct RegistryEntry {
  Family family = Family::circle_square;
  int l = 0, m = 0, n = 0;
  double value = 0;  // published digits; ellipse entries store area / pi
  std::string source;
};

const std::vector<RegistryEntry>& registry();
std::optional<RegistryEntry> registry_lookup(Family family, int l, int m, int n);

std::string registry_to_text(const std::vector<RegistryEntry>& entries);
std::vector<RegistryEntry> registry_from_text(const std::string& text);

}  // namespace packing
