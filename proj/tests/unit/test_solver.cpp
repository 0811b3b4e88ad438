#include <gtest/gtest.h>

#include "rbmm/apps/quadratic.hpp"
#include "rbmm/errors.hpp"
#include "rbmm/solver.hpp"
#include "support.hpp"

namespace rbmm {
namespace {

using test::col;
using test::scalar;

namespace q = apps::quadratic;

SolverConfig config_for(const SurrogateSpec& s, std::size_t blocks, int cycles) {
  SolverConfig c;
  c.max_cycles = cycles;
  c.surrogates.assign(blocks, s);
  return c;
}

// Two unconstrained Euclidean blocks with constant gradients g0, g1.
BlockProblem constant_gradient_problem(Matrix g0, Matrix g1) {
  BlockProblem p;
  p.manifolds = {Manifold::euclidean(g0.rows()), Manifold::euclidean(g1.rows())};
  p.constraints = {Constraint::whole(), Constraint::whole()};
  p.value = [g0, g1](const ProductPoint& s) {
    return (g0.transpose() * s[0].data)(0, 0) + (g1.transpose() * s[1].data)(0, 0);
  };
  p.egrad = [g0, g1](const ProductPoint&, std::size_t i) { return i == 0 ? g0 : g1; };
  return p;
}

TEST(RunRbmm, QuadraticDemoConverges) {
  const RunResult r = run_rbmm(q::problem(), config_for(q::proximal_spec(constant_schedule(1.0)), 2, 200),
                               q::initial_point(0, 0));
  EXPECT_NEAR(r.final_point[0].data(0, 0), 0.0, 1e-8);
  EXPECT_NEAR(r.final_point[1].data(0, 0), 2.0, 1e-8);
  EXPECT_NEAR(r.trace.back().objective, 1.0, 1e-12);
  EXPECT_EQ(r.trace.size(), 201u);
  EXPECT_EQ(r.trace.front().cycle, 0);
}

TEST(RunRbmm, GenericPathMatchesExactSolver) {
  // Same problem through the iterative inner solver. Its line search compares
  // objective values, so it resolves the minimizer to about sqrt(eps).
  SurrogateSpec s = SurrogateSpec::euclidean_proximal(constant_schedule(1.0));
  s.inner_tol = constant_schedule(1e-13);
  const RunResult r = run_rbmm(q::problem(), config_for(s, 2, 200), q::initial_point(0, 0));
  EXPECT_NEAR(r.final_point[0].data(0, 0), 0.0, 1e-6);
  EXPECT_NEAR(r.final_point[1].data(0, 0), 2.0, 1e-6);
  EXPECT_TRUE(audit_trace(r.trace, 2, 1e-12).ok());
}

TEST(RunRbmm, SingleBlockProxLinearIsGradientDescent) {
  // f(x) = ||x - c||^2 with L = 2.
  const Matrix c = col({1, -2, 0.5});
  BlockProblem p;
  p.manifolds = {Manifold::euclidean(3)};
  p.constraints = {Constraint::whole()};
  p.value = [c](const ProductPoint& s) { return (s[0].data - c).squaredNorm(); };
  p.egrad = [c](const ProductPoint& s, std::size_t) { return Matrix(2.0 * (s[0].data - c)); };
  const ProductPoint init{{Point{p.manifolds[0], col({0, 0, 0})}}};
  const RunResult r = run_rbmm(p, config_for(SurrogateSpec::prox_linear(constant_schedule(3.0)), 1, 100), init);
  for (std::size_t n = 1; n < r.trace.size(); ++n) EXPECT_LE(r.trace[n].objective, r.trace[n - 1].objective);
  EXPECT_LT((r.final_point[0].data - c).norm(), 1e-10);
}

TEST(RunRbmm, StationaryInitWithIdentityDoesNotMove) {
  const RunResult r = run_rbmm(q::problem(), config_for(q::exact_spec(), 2, 5), q::initial_point(0, 2));
  for (const auto& rec : r.trace)
    for (double s : rec.steps) EXPECT_EQ(s, 0.0);
}

TEST(RunRbmm, FixedPointOfProximalCycle) {
  SurrogateSpec s = SurrogateSpec::euclidean_proximal(constant_schedule(0.5));
  const RunResult r = run_rbmm(q::problem(), config_for(s, 2, 1), q::initial_point(0, 2));
  for (double d : r.trace.back().steps) EXPECT_LE(d, 1e-8);
}

TEST(RunRbmm, StopTolerance) {
  SolverConfig c = config_for(q::exact_spec(), 2, 2000);
  c.stop_tol = 1e-6;
  const RunResult r = run_rbmm(q::problem(), c, q::initial_point(0, 0));
  EXPECT_LT(r.trace.size(), 2001u);
  EXPECT_LE(*r.trace.back().stationarity, 1e-6);
}

TEST(RunRbmm, StationarityStride) {
  SolverConfig c = config_for(q::exact_spec(), 2, 10);
  c.stationarity_every = 4;
  const RunResult r = run_rbmm(q::problem(), c, q::initial_point(0, 0));
  EXPECT_TRUE(r.trace[0].stationarity.has_value());
  EXPECT_FALSE(r.trace[1].stationarity.has_value());
  EXPECT_TRUE(r.trace[4].stationarity.has_value());
  EXPECT_TRUE(r.trace[10].stationarity.has_value());
}

TEST(RunRbmm, Contracts) {
  const BlockProblem p = q::problem();
  EXPECT_THROW(run_rbmm(p, config_for(q::exact_spec(), 1, 5), q::initial_point(0, 0)), ContractViolation);
  EXPECT_THROW(run_rbmm(p, config_for(q::exact_spec(), 2, 0), q::initial_point(0, 0)), ContractViolation);
  BlockProblem ball = p;
  ball.constraints[0] = Constraint::euclidean_ball(scalar(0), 1.0);
  EXPECT_THROW(run_rbmm(ball, config_for(q::exact_spec(), 2, 5), q::initial_point(3, 0)), ContractViolation);
}

TEST(RunRbmm, Deterministic) {
  const SolverConfig c = config_for(q::proximal_spec(constant_schedule(0.3)), 2, 50);
  const RunResult a = run_rbmm(q::problem(), c, q::initial_point(-1, 5));
  const RunResult b = run_rbmm(q::problem(), c, q::initial_point(-1, 5));
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t n = 0; n < a.trace.size(); ++n) {
    EXPECT_EQ(a.trace[n].objective, b.trace[n].objective);
    EXPECT_EQ(a.trace[n].gaps, b.trace[n].gaps);
    EXPECT_EQ(a.trace[n].steps, b.trace[n].steps);
    EXPECT_EQ(a.trace[n].stationarity, b.trace[n].stationarity);
  }
}

TEST(Stationarity, Examples) {
  const BlockProblem zero = constant_gradient_problem(col({0, 0}), col({0}));
  const ProductPoint s0{{Point{zero.manifolds[0], col({1, 1})}, Point{zero.manifolds[1], col({2})}}};
  EXPECT_EQ(stationarity_measure(zero, s0), 0.0);

  const BlockProblem p = constant_gradient_problem(col({0.3, 0}), col({0, 0.4}));
  const ProductPoint s{{Point{p.manifolds[0], col({0, 0})}, Point{p.manifolds[1], col({0, 0})}}};
  EXPECT_NEAR(stationarity_measure(p, s), 0.7, 1e-15);
}

TEST(Stationarity, BallBoundary) {
  // Block at (1, 0) on the unit ball boundary.
  const auto measure = [](const Matrix& g) {
    BlockProblem p;
    p.manifolds = {Manifold::euclidean(2)};
    p.constraints = {Constraint::euclidean_ball(col({0, 0}), 1.0)};
    p.value = [g](const ProductPoint& s) { return (g.transpose() * s[0].data)(0, 0); };
    p.egrad = [g](const ProductPoint&, std::size_t) { return g; };
    return stationarity_measure(p, ProductPoint{{Point{p.manifolds[0], col({1, 0})}}});
  };
  // Gradient pointing outward: descent is inward and fully counted.
  EXPECT_NEAR(measure(col({2, 0})), 2.0, 1e-15);
  // Gradient pointing inward: descent leaves the ball and is removed.
  EXPECT_EQ(measure(col({-2, 0})), 0.0);
}

TEST(StationarityProperty, InvariantUnderConstantShift) {
  test::for_seeds(20, [](Rng& rng) {
    BlockProblem p = q::problem();
    const double shift = uniform(rng, -100, 100);
    BlockProblem shifted = p;
    shifted.value = [v = p.value, shift](const ProductPoint& s) { return v(s) + shift; };
    const ProductPoint x = q::initial_point(uniform(rng, -3, 3), uniform(rng, -3, 3));
    EXPECT_EQ(stationarity_measure(p, x), stationarity_measure(shifted, x));
  });
}

IterationRecord record(int n, double f, double delta) {
  IterationRecord r;
  r.cycle = n;
  r.objective = f;
  r.gaps = {0.0, 0.0};
  r.deltas = {delta, delta};
  return r;
}

TEST(Audit, Examples) {
  std::vector<IterationRecord> t;
  for (double f : {3.0, 2.0, 2.0, 1.5}) t.push_back(record(static_cast<int>(t.size()), f, 0.0));
  EXPECT_TRUE(audit_trace(t, 2, 1e-12).ok());

  const std::vector<IterationRecord> up{record(0, 1.0, 0.0), record(1, 2.0, 0.0)};
  const AuditReport bad = audit_trace(up, 2, 1e-12);
  ASSERT_EQ(bad.violations.size(), 1u);
  EXPECT_EQ(bad.violations[0], 1);

  const std::vector<IterationRecord> inexact{record(0, 1.0, 0.0), record(1, 1.15, 0.1)};
  EXPECT_TRUE(audit_trace(inexact, 2, 0.0).ok());

  EXPECT_THROW(audit_trace({}, 2, 0.0), ContractViolation);
}

TEST(AuditProperty, GapSumsBoundedByDecrease) {
  const RunResult r = run_rbmm(q::problem(), config_for(q::proximal_spec(constant_schedule(1.0)), 2, 300),
                               q::initial_point(4, -3));
  const AuditReport a = audit_trace(r.trace, 2, 1e-12);
  EXPECT_TRUE(a.ok());
  double lowest = r.trace.front().objective;
  for (std::size_t n = 0; n < r.trace.size(); ++n) {
    lowest = std::min(lowest, r.trace[n].objective);
    if (n > 0) {
      EXPECT_GE(a.gap_partial_sums[n], a.gap_partial_sums[n - 1]);
    }
    EXPECT_LE(a.gap_partial_sums[n], r.trace.front().objective - lowest + 2 * a.delta_partial_sums[n] + 1e-9);
  }
  for (std::size_t n = 1; n < a.running_min_stationarity.size(); ++n)
    EXPECT_LE(a.running_min_stationarity[n], a.running_min_stationarity[n - 1]);
}

}  // namespace
}  // namespace rbmm
