#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "packing/certify.hpp"
#include "packing/model.hpp"

namespace packing {

enum class SolveMode { faithful, sat_penalty };
const char* solve_mode_name(SolveMode m);

struct SolverConfig {
  int restarts = 20;
  double time_budget = 60.0;  // seconds
  std::uint64_t seed = 0;
  double kkt_tol = 1e-9;
  int max_inner_iters = 500;
  SolveMode mode = SolveMode::sat_penalty;
  std::optional<double> target_objective;  // stop once an incumbent is at least this good
  int threads = 1;
};

struct LocalResult {
  std::vector<double> x;
  double objective = 0;
  double max_violation = 0;
  bool feasible = false;
  bool aborted = false;  // non-finite values encountered
};

struct SolveReport {
  std::optional<Solution> best;
  std::vector<std::pair<int, double>> incumbents;  // (restart index, objective)
  int restarts_completed = 0;
  std::string termination;
  std::vector<FarkasCertificate> farkas;  // polygon/platonic best, one per pair
  std::vector<SLemmaCertificate> slemma;  // ellipse best, one per circle
};

/// Independent PRNG stream for one restart; parallel and serial runs visit
/// identical start points.
std::mt19937_64 restart_rng(std::uint64_t seed, int restart);

std::vector<double> sample_start(const ConstraintSystem& sys, std::mt19937_64& rng);

/// Augmented-Lagrangian local solve with bound projection.
LocalResult local_solve(const ConstraintSystem& sys, std::vector<double> x0,
                        const SolverConfig& config);

SolveReport multistart(const Instance& instance, const SolverConfig& config);
SolveReport multistart(const ConstraintSystem& sys, const SolverConfig& config);

/// Writes half-space auxiliaries (and, given certificates, Farkas multipliers)
/// consistent with the poses into a value vector.
void sync_aux_variables(const ConstraintSystem& sys, std::vector<double>& x);
void write_pair_multipliers(const ConstraintSystem& sys, std::vector<double>& x,
                            const std::vector<FarkasCertificate>& certs);

}  // namespace packing
