#include "rbmm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "rbmm/errors.hpp"

namespace rbmm {

Marginal marginal_of(const BlockProblem& problem, const ProductPoint& state, std::size_t block) {
  if (block >= problem.blocks()) throw ContractViolation("marginal_of: block index out of range");
  auto frozen = std::make_shared<const ProductPoint>(state);
  // One scratch copy per marginal; the callables write the candidate into it.
  auto scratch = std::make_shared<ProductPoint>(state);
  const Manifold m = problem.manifolds[block];
  Marginal out;
  out.manifold = m;
  out.state = frozen;
  out.block = block;
  out.smoothness = problem.smoothness;
  out.value = [&problem, scratch, block, m](const Matrix& x) {
    (*scratch)[block] = Point{m, x};
    return problem.value(*scratch);
  };
  out.egrad = [&problem, scratch, block, m](const Matrix& x) {
    (*scratch)[block] = Point{m, x};
    return problem.egrad(*scratch, block);
  };
  return out;
}

TangentVector block_rgrad(const BlockProblem& problem, const ProductPoint& state, std::size_t block) {
  return egrad_to_rgrad(state[block], problem.egrad(state, block));
}

double IterationRecord::delta_n() const {
  double d = 0.0;
  for (double v : deltas) d = std::max(d, v);
  return d;
}

namespace {

void validate(const BlockProblem& problem, const SolverConfig& config, const ProductPoint& init) {
  const std::size_t m = problem.blocks();
  if (m == 0) throw ContractViolation("run_rbmm: problem has no blocks");
  if (problem.constraints.size() != m)
    throw ContractViolation("run_rbmm: one constraint per block required");
  if (config.surrogates.size() != m)
    throw ContractViolation("run_rbmm: one surrogate spec per block required");
  if (config.max_cycles < 1) throw ContractViolation("run_rbmm: max_cycles must be at least 1");
  if (config.stationarity_every < 1)
    throw ContractViolation("run_rbmm: stationarity stride must be at least 1");
  if (!problem.value || !problem.egrad) throw ContractViolation("run_rbmm: missing callables");
  if (init.size() != m) throw ContractViolation("run_rbmm: initial point has the wrong block count");
  for (std::size_t i = 0; i < m; ++i) {
    check_constraint(problem.constraints[i], problem.manifolds[i]);
    if (!(init[i].manifold == problem.manifolds[i]))
      throw ContractViolation("run_rbmm: initial block " + std::to_string(i) + " is on the wrong manifold");
    if (!is_valid_point(init[i], 1e-8))
      throw ContractViolation("run_rbmm: initial block " + std::to_string(i) + " is not a valid point");
    if (!satisfies(problem.constraints[i], init[i]))
      throw ContractViolation("run_rbmm: initial block " + std::to_string(i) + " violates its constraint");
  }
}

}  // namespace

RunResult run_rbmm(const BlockProblem& problem, const SolverConfig& config, const ProductPoint& init) {
  validate(problem, config, init);
  const std::size_t m = problem.blocks();
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  RunResult out;
  ProductPoint state = init;
  IterationRecord first;
  first.objective = problem.value(state);
  first.gaps.assign(m, 0.0);
  first.deltas.assign(m, 0.0);
  first.steps.assign(m, 0.0);
  first.stationarity = stationarity_measure(problem, state);
  out.trace.push_back(first);

  for (int n = 1; n <= config.max_cycles; ++n) {
    IterationRecord rec;
    rec.cycle = n;
    rec.gaps.resize(m);
    rec.deltas.resize(m);
    rec.steps.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const Marginal marg = marginal_of(problem, state, i);
      const SurrogateInstance g = build_surrogate(config.surrogates[i], marg, state[i], n);
      BlockSolution sol = minimize_block(g, problem.constraints[i], problem.manifolds[i]);
      if (!sol.point.data.allFinite()) {
        std::ostringstream os;
        os << "run_rbmm: block " << i << " update produced non-finite values at cycle " << n;
        throw NumericalError(os.str());
      }
      rec.gaps[i] = g.value(sol.point) - marg.value(sol.point.data);
      rec.deltas[i] = sol.delta_bound;
      rec.steps[i] = dist(state[i], sol.point);
      rec.certified = rec.certified && sol.certified;
      state[i] = std::move(sol.point);
    }
    rec.objective = problem.value(state);
    if (!std::isfinite(rec.objective)) throw NumericalError("run_rbmm: objective became non-finite");
    const bool last = n == config.max_cycles;
    if (n % config.stationarity_every == 0 || last || config.stop_tol)
      rec.stationarity = stationarity_measure(problem, state);
    rec.wall_time = elapsed();
    out.trace.push_back(std::move(rec));
    const auto& s = out.trace.back().stationarity;
    if (config.stop_tol && s && *s <= *config.stop_tol) break;
  }
  out.final_point = std::move(state);
  return out;
}

double stationarity_measure(const BlockProblem& problem, const ProductPoint& state) {
  double total = 0.0;
  for (std::size_t i = 0; i < problem.blocks(); ++i) {
    const Point& x = state[i];
    const TangentVector g = block_rgrad(problem, state, i);
    const TangentVector d = project_cone(problem.constraints[i], x, scale(g, -1.0));
    total += norm(x, d) / x.manifold.r_hat();
  }
  return total;
}

AuditReport audit_trace(const std::vector<IterationRecord>& trace, std::size_t m, double tolerance) {
  if (trace.empty()) throw ContractViolation("audit_trace: empty trace");
  AuditReport rep;
  double gaps = 0.0;
  double deltas = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < trace.size(); ++n) {
    const IterationRecord& r = trace[n];
    for (double g : r.gaps) gaps += g;
    const double dn = r.delta_n();
    deltas += dn;
    rep.gap_partial_sums.push_back(gaps);
    rep.delta_partial_sums.push_back(deltas);
    if (r.stationarity) {
      best = std::min(best, *r.stationarity);
      rep.running_min_stationarity.push_back(best);
    }
    if (n > 0) {
      const double decrease = trace[n - 1].objective - r.objective;
      if (decrease < -static_cast<double>(m) * dn - tolerance) rep.violations.push_back(static_cast<int>(n));
    }
  }
  return rep;
}

}  // namespace rbmm
