#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rbmm/problem.hpp"
#include "rbmm/surrogates.hpp"

namespace rbmm {

struct SolverConfig {
  int max_cycles = 100;
  std::vector<SurrogateSpec> surrogates;
  std::uint64_t seed = 0;
  int stationarity_every = 1;
  std::optional<double> stop_tol;
};

struct IterationRecord {
  int cycle = 0;
  double objective = 0.0;
  // Per block: g - f at the new block value, optimality-gap bound, step distance.
  std::vector<double> gaps;
  std::vector<double> deltas;
  std::vector<double> steps;
  std::optional<double> stationarity;
  double wall_time = 0.0;
  bool certified = true;

  // Worst block bound for the cycle.
  double delta_n() const;
};

struct RunResult {
  // Entry 0 is the initial point (zero gaps, deltas and steps).
  std::vector<IterationRecord> trace;
  ProductPoint final_point;
};

RunResult run_rbmm(const BlockProblem& problem, const SolverConfig& config, const ProductPoint& init);

// Sum over blocks of the first-order measure divided by r_hat. Ball blocks
// on the boundary use the tangent-cone projection of the descent direction.
double stationarity_measure(const BlockProblem& problem, const ProductPoint& state);

struct AuditReport {
  // Cycles n with f(n-1) - f(n) < -m * Delta_n - tolerance.
  std::vector<int> violations;
  std::vector<double> gap_partial_sums;
  std::vector<double> delta_partial_sums;
  std::vector<double> running_min_stationarity;
  bool ok() const { return violations.empty(); }
};

AuditReport audit_trace(const std::vector<IterationRecord>& trace, std::size_t m, double tolerance);

}  // namespace rbmm
