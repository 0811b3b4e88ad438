#include "rbmm/cli/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "rbmm/apps/cp.hpp"
#include "rbmm/apps/likelihood.hpp"
#include "rbmm/apps/quadratic.hpp"
#include "rbmm/apps/rpca.hpp"
#include "rbmm/apps/subspace.hpp"
#include "rbmm/diagnostics.hpp"

namespace rbmm::cli {

namespace {

Schedule lambda_schedule(const RunConfig& c) {
  if (c.lambda_ratio == 1.0) return constant_schedule(c.lambda);
  return geometric_schedule(c.lambda, c.lambda_ratio);
}

io::DataArray tagged(io::DataArray a, const RunConfig& c, double noise) {
  a.seed = c.seed;
  a.noise = noise;
  return a;
}

Experiment quadratic_experiment(const RunConfig& c) {
  namespace q = apps::quadratic;
  Experiment e;
  e.problem = q::problem();
  const SurrogateSpec s = c.surrogate == "exact" ? q::exact_spec() : q::proximal_spec(lambda_schedule(c));
  e.specs = {s, s};
  e.init = q::initial_point(c.init_a, c.init_b);
  e.error_name = "distance_to_stationary_point";
  e.error = [](const ProductPoint& x) {
    return std::hypot(x[0].data(0, 0), x[1].data(0, 0) - 2.0);
  };
  return e;
}

Experiment subspace_experiment(const RunConfig& c, Rng& rng) {
  namespace st = apps::subspace;
  auto gen = std::make_shared<st::Generated>(
      st::st_generate(c.dim, c.rank, c.time_points, c.samples, c.noise, rng, c.max_angle));
  Experiment e;
  e.problem = st::st_problem(gen->data, c.rank);
  e.specs = {st::q_spec(lambda_schedule(c)), st::theta_spec(gen->data, constant_schedule(c.lambda_theta))};
  e.init = c.init == "truth" ? st::to_state(gen->truth) : st::random_state(c.dim, c.rank, rng, c.max_angle);
  e.error_name = "geodesic_error";
  const int grid = c.time_points;
  e.error = [gen, grid](const ProductPoint& x) {
    return st::st_geodesic_error(st::from_state(x), gen->truth, grid);
  };
  io::DataArray obs;
  obs.dims = {static_cast<std::uint32_t>(c.time_points), static_cast<std::uint32_t>(c.dim),
              static_cast<std::uint32_t>(c.samples)};
  for (const Matrix& x : gen->data.x)
    for (Index i = 0; i < x.rows(); ++i)
      for (Index j = 0; j < x.cols(); ++j) obs.values.push_back(x(i, j));
  io::DataArray times;
  times.dims = {static_cast<std::uint32_t>(c.time_points)};
  times.values = gen->data.t;
  e.data = {{"observations", tagged(obs, c, c.noise)}, {"times", tagged(times, c, c.noise)}};
  return e;
}

Experiment likelihood_experiment(const RunConfig& c, Rng& rng) {
  namespace ol = apps::likelihood;
  const Matrix samples = ol::ol_generate(c.dim, c.train_samples + c.samples, rng);
  const ol::Problem p = ol::ol_make_split(samples, c.train_samples, c.rho2);
  Experiment e;
  e.problem = ol::ol_build(p);
  const Schedule lambda = c.surrogate == "exact" ? constant_schedule(0.0) : lambda_schedule(c);
  e.specs = ol::ol_specs(p, lambda, constant_schedule(c.inner_tol), c.inner_budget);
  e.init = ol::ol_initial_point(p, rng);
  // No ground truth: report the final relative improvement of the objective.
  e.error_name = "relative_improvement";
  e.error = nullptr;
  e.data = {{"samples", tagged(io::from_matrix(samples), c, 0.0)}};
  return e;
}

Experiment cp_experiment(const RunConfig& c, Rng& rng) {
  namespace cp = apps::cp;
  const cp::FactorConstraint first = c.first_factor == "stiefel"     ? cp::FactorConstraint::Stiefel
                                     : c.first_factor == "fixed-rank" ? cp::FactorConstraint::FixedRank
                                                                      : cp::FactorConstraint::Euclidean;
  std::vector<Index> dims(c.dims.begin(), c.dims.end());
  auto gen = std::make_shared<cp::Generated>(cp::cp_generate(dims, c.rank, c.noise, rng, first, c.factor_rank));
  cp::Setup s = cp::cp_build(gen->tensor, c.rank, first, c.factor_rank, lambda_schedule(c), c.surrogate == "proximal");
  Experiment e;
  e.problem = std::move(s.problem);
  e.specs = std::move(s.specs);
  e.init = cp::random_factors(gen->tensor, c.rank, first, c.factor_rank, rng);
  e.error_name = "relative_reconstruction_error";
  e.error = [gen](const ProductPoint& x) { return cp::relative_error(gen->tensor, cp::factors_of(x)); };
  io::DataArray t;
  for (Index d : dims) t.dims.push_back(static_cast<std::uint32_t>(d));
  t.values.assign(gen->tensor.data.data(), gen->tensor.data.data() + gen->tensor.data.size());
  e.data = {{"tensor", tagged(t, c, c.noise)}};
  return e;
}

Experiment rpca_experiment(const RunConfig& c, Rng& rng) {
  namespace rp = apps::rpca;
  auto gen = std::make_shared<rp::Generated>(rp::rpca_generate(c.rows, c.cols, c.rank, c.corruption, rng));
  rp::Params p;
  p.rank = c.rank;
  p.sparsity = *c.sparsity;
  p.fidelity = c.fidelity;
  p.smoothing = c.smoothing;
  const Schedule prox = c.surrogate == "exact" ? constant_schedule(0.0) : lambda_schedule(c);
  rp::Setup s = rp::rpca_build(gen->observed, p, prox);
  Experiment e;
  e.problem = std::move(s.problem);
  e.specs = std::move(s.specs);
  e.init = rp::rpca_initial_point(gen->observed, p);
  e.error_name = "relative_low_rank_error";
  e.error = [gen](const ProductPoint& x) { return (x[0].data - gen->low_rank).norm() / gen->low_rank.norm(); };
  e.data = {{"observed", tagged(io::from_matrix(gen->observed), c, 0.0)},
            {"low_rank", tagged(io::from_matrix(gen->low_rank), c, 0.0)},
            {"sparse", tagged(io::from_matrix(gen->sparse), c, 0.0)}};
  return e;
}

double relative_improvement(const std::vector<IterationRecord>& trace) {
  if (trace.size() < 2) return 0.0;
  const double a = trace[trace.size() - 2].objective;
  const double b = trace.back().objective;
  return std::abs(b - a) / std::abs(b);
}

}  // namespace

Experiment build_experiment(const RunConfig& c, Rng& rng) {
  switch (c.application) {
    case Application::QuadraticDemo: return quadratic_experiment(c);
    case Application::SubspaceTracking: return subspace_experiment(c, rng);
    case Application::OptimisticLikelihood: return likelihood_experiment(c, rng);
    case Application::CpDictionary: return cp_experiment(c, rng);
    case Application::Rpca: return rpca_experiment(c, rng);
  }
  throw ConfigError("unknown application");
}

std::vector<double> running_min_stationarity(const std::vector<IterationRecord>& trace) {
  std::vector<double> out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : trace) {
    if (r.cycle < 1 || !r.stationarity) continue;
    best = std::min(best, *r.stationarity);
    out.push_back(best);
  }
  return out;
}

std::optional<double> stationarity_rate(const std::vector<IterationRecord>& trace) {
  const std::vector<double> seq = running_min_stationarity(trace);
  if (seq.empty()) return std::nullopt;
  const std::vector<double> head = truncate_at_floor(seq, 2.0 * seq.back());
  if (head.size() < 10) return std::nullopt;
  return rate_fit(head).slope;
}

TrialResult run_trial(const RunConfig& c, int trial) {
  TrialResult out;
  out.trial = trial;
  out.seed = c.seed + static_cast<std::uint64_t>(trial);
  Rng rng = trial_rng(c.seed, static_cast<std::uint64_t>(trial));
  const auto start = std::chrono::steady_clock::now();
  const Experiment e = build_experiment(c, rng);
  SolverConfig sc;
  sc.max_cycles = c.max_cycles;
  sc.surrogates = e.specs;
  sc.seed = out.seed;
  sc.stationarity_every = c.stationarity_every;
  sc.stop_tol = c.stop_tol;
  out.run = run_rbmm(e.problem, sc, e.init);
  out.error_name = e.error_name;
  out.error = e.error ? e.error(out.run.final_point) : relative_improvement(out.run.trace);
  const auto rm = running_min_stationarity(out.run.trace);
  out.running_min_stationarity = rm.empty() ? *out.run.trace.front().stationarity : rm.back();
  out.rate_slope = stationarity_rate(out.run.trace);
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<TrialResult> run_trials(const RunConfig& c) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      std::min<unsigned>(c.threads > 0 ? static_cast<unsigned>(c.threads) : hw, static_cast<unsigned>(c.trials));
  std::vector<TrialResult> results(c.trials);
  std::vector<std::exception_ptr> errors(c.trials);
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int t = next++; t < c.trials; t = next++) {
      try {
        results[t] = run_trial(c, t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

nlohmann::json summarize(const RunConfig& c, const std::vector<TrialResult>& trials, double wall_time) {
  nlohmann::json j;
  j["config"] = c.to_json();
  j["error_metric"] = trials.empty() ? std::string() : trials.front().error_name;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& t : trials) {
    const IterationRecord& last = t.run.trace.back();
    list.push_back({
        {"trial", t.trial},
        {"seed", t.seed},
        {"cycles", last.cycle},
        {"final_objective", last.objective},
        {"final_error", t.error},
        {"final_stationarity", last.stationarity ? nlohmann::json(*last.stationarity) : nlohmann::json()},
        {"running_min_stationarity", t.running_min_stationarity},
        {"rate_slope", t.rate_slope ? nlohmann::json(*t.rate_slope) : nlohmann::json()},
        {"certified", std::all_of(t.run.trace.begin(), t.run.trace.end(),
                                  [](const IterationRecord& r) { return r.certified; })},
        {"trace", trace_file_name(t.trial)},
        {"wall_time", t.wall_time},
    });
  }
  j["trials"] = list;
  j["wall_time"] = wall_time;
  return j;
}

std::string trace_file_name(int trial) { return "trace_" + std::to_string(trial) + ".csv"; }

}  // namespace rbmm::cli
