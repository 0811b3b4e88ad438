#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbmm/cli/config.hpp"
#include "rbmm/io.hpp"
#include "rbmm/solver.hpp"

namespace rbmm::cli {

struct Experiment {
  BlockProblem problem;
  std::vector<SurrogateSpec> specs;
  ProductPoint init;
  // Application-specific accuracy of a final point (lower is better).
  std::string error_name;
  std::function<double(const ProductPoint&)> error;
  // Named arrays for gen-data.
  std::vector<std::pair<std::string, io::DataArray>> data;
};

// Consumes `rng` in a fixed order: the dataset first, then the initial point.
Experiment build_experiment(const RunConfig& config, Rng& rng);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  RunResult run;
  std::string error_name;
  double error = 0.0;
  double running_min_stationarity = 0.0;
  std::optional<double> rate_slope;
  double wall_time = 0.0;
};

// Trial t draws from Rng(seed + t).
TrialResult run_trial(const RunConfig& config, int trial);
// Runs every trial, concurrently when config.threads allows; results are in trial order.
std::vector<TrialResult> run_trials(const RunConfig& config);

// Running minimum of the measured stationarity over cycles >= 1.
std::vector<double> running_min_stationarity(const std::vector<IterationRecord>& trace);
// rate_fit slope of the running-min stationarity, fitted before it settles
// within a factor 2 of its final value; nullopt when fewer than 10 points remain.
std::optional<double> stationarity_rate(const std::vector<IterationRecord>& trace);

nlohmann::json summarize(const RunConfig& config, const std::vector<TrialResult>& trials,
                         double wall_time);

std::string trace_file_name(int trial);

}  // namespace rbmm::cli
