#pragma once

// Flat INI-style run configuration. One `key = value` per line, `#` or `;`
// comments, no sections. Unknown keys and keys that do not apply to the
// chosen application are errors.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace rbmm::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Application { QuadraticDemo, SubspaceTracking, OptimisticLikelihood, CpDictionary, Rpca };

const char* application_name(Application a);

struct RunConfig {
  Application application = Application::QuadraticDemo;
  // "proximal" everywhere; "exact" (quadratic-demo, optimistic-likelihood)
  // and "als" (cp-dictionary) select plain block minimization.
  std::string surrogate = "proximal";
  // Proximal weight schedule lambda * ratio^cycle.
  double lambda = 1.0;
  double lambda_ratio = 1.0;
  int trials = 1;
  std::uint64_t seed = 0;
  int max_cycles = 200;
  int stationarity_every = 1;
  std::optional<double> stop_tol;
  int threads = 0;  // 0: one per trial up to the hardware count
  std::string out_dir = "out";

  // quadratic-demo
  double init_a = 0.0;
  double init_b = 0.0;

  // subspace-tracking
  int dim = 30;
  int rank = 3;
  int time_points = 10;
  int samples = 5;
  double noise = 0.1;
  double max_angle = 1.0;
  double lambda_theta = 0.0;
  std::string init = "random";  // or "truth"

  // optimistic-likelihood (dim, samples shared above; defaults adjusted on parse)
  int train_samples = 50;
  double rho2 = 0.5;
  double inner_tol = 1e-10;
  int inner_budget = 500;

  // cp-dictionary
  std::vector<int> dims = {30, 20, 10};
  std::string first_factor = "euclidean";  // stiefel, fixed-rank
  int factor_rank = 2;

  // rpca
  int rows = 50;
  int cols = 50;
  double corruption = 0.05;
  std::optional<double> sparsity;  // default 1/sqrt(max(rows, cols))
  double fidelity = 1.0;
  double smoothing = 1e-2;

  // probe
  std::string probes = "all";  // geometry, gradient, gsmooth
  int probe_samples = 100;
  double gradient_fault = 0.0;  // relative perturbation injected into probed gradients

  nlohmann::json to_json() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace rbmm::cli
