#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "rbmm/constraints.hpp"
#include "rbmm/geometry.hpp"
#include "rbmm/problem.hpp"

namespace rbmm {

enum class SurrogateFamily {
  RiemannianProximal,        // f + (lambda/2) d^2(., anchor)
  EuclideanProximal,         // f + (lambda/2) ||. - anchor||_F^2
  ProxLinear,                // f(a) + <grad f(a), . - a> + (1/2) sum (lambda + w) (. - a)^2
  RegularizedLinearStiefel,  // f(a) - 2 <R(a), . - a> + lambda ||. - a||_F^2
  Identity,                  // f itself
};

const char* family_name(SurrogateFamily family);

// Cycle-indexed scalar sequence (proximal weights, inner tolerances).
using Schedule = std::function<double(int cycle)>;
Schedule constant_schedule(double value);
// initial * ratio^cycle
Schedule geometric_schedule(double initial, double ratio);

// Map from the marginal and anchor to an ambient matrix.
using AnchorMap = std::function<Matrix(const Marginal&, const Point& anchor)>;
// Application-supplied argmin of the family's surrogate over the block
// constraint; nullopt means "no closed form here", and the generic path runs.
using ExactSolver =
    std::function<std::optional<Matrix>(const Marginal&, const Point& anchor, double lambda)>;

struct SurrogateSpec {
  SurrogateFamily family = SurrogateFamily::Identity;
  Schedule lambda = constant_schedule(0.0);
  // RegularizedLinearStiefel: R(anchor). Defaults to -grad f(anchor)/2,
  // which majorizes whenever f is concave in the ambient space.
  AnchorMap r_map;
  // ProxLinear: entrywise curvature added to lambda (e.g. a Lipschitz bound).
  AnchorMap curvature;
  ExactSolver exact;
  // Known strong-convexity modulus of the surrogate as a function of lambda.
  std::function<double(double lambda)> strong_convexity;
  bool allow_closed_form = true;
  int inner_budget = 500;
  Schedule inner_tol = constant_schedule(1e-10);
  double armijo_sigma = 1e-4;
  double armijo_beta = 0.5;

  static SurrogateSpec riemannian_proximal(Schedule lambda);
  static SurrogateSpec euclidean_proximal(Schedule lambda);
  static SurrogateSpec prox_linear(Schedule lambda, AnchorMap curvature = {});
  static SurrogateSpec regularized_linear_stiefel(Schedule lambda, AnchorMap r_map = {});
  static SurrogateSpec identity();
};

class SurrogateInstance {
 public:
  SurrogateInstance(SurrogateSpec spec, Marginal marginal, Point anchor, int cycle);

  SurrogateFamily family() const { return spec_.family; }
  const SurrogateSpec& spec() const { return spec_; }
  const Marginal& marginal() const { return marginal_; }
  const Point& anchor() const { return anchor_; }
  int cycle() const { return cycle_; }
  double lambda() const { return lambda_; }
  double anchor_objective() const { return anchor_value_; }

  double value(const Point& x) const;
  TangentVector rgrad(const Point& x) const;

  // ProxLinear data: gradient at the anchor and entrywise weights lambda + w.
  const Matrix& anchor_egrad() const { return anchor_egrad_; }
  const Matrix& weights() const { return weights_; }
  bool uniform_weights() const { return uniform_weights_; }
  // RegularizedLinearStiefel data: R(anchor).
  const Matrix& r_matrix() const { return r_; }

 private:
  SurrogateSpec spec_;
  Marginal marginal_;
  Point anchor_;
  int cycle_;
  double lambda_;
  double anchor_value_;
  Matrix anchor_egrad_;
  Matrix weights_;
  bool uniform_weights_ = true;
  Matrix r_;
};

SurrogateInstance build_surrogate(const SurrogateSpec& spec, const Marginal& marginal,
                                  const Point& anchor, int cycle = 0);

struct BlockSolution {
  Point point;
  // Upper bound on g(point) - inf g over the constraint.
  double delta_bound = 0.0;
  bool certified = true;
  bool converged = true;
  bool closed_form = true;
  int inner_iterations = 0;
};

BlockSolution minimize_block(const SurrogateInstance& surrogate, const Constraint& constraint,
                             const Manifold& manifold);

// Largest beta^j (j >= 0) with g(R_x(beta^j d)) <= g(x) + sigma beta^j <grad g(x), d>.
// `feasible` maps the retracted point back into the constraint when given.
double armijo_step(const std::function<double(const Point&)>& g_value,
                   const std::function<TangentVector(const Point&)>& g_rgrad, const Point& x,
                   const TangentVector& direction, double sigma = 1e-4, double beta = 0.5,
                   const std::function<Point(const Point&)>& feasible = {});

struct MajorizationReport {
  int samples = 0;
  // max over samples of f - g (positive means violation)
  double max_violation = 0.0;
  double anchor_gap = 0.0;
  // min over samples of (g - f) / d^phi_power, compared against c
  double min_growth_ratio = 0.0;
  double c = 0.0;
  bool growth_ok = false;
  bool majorizes(double tol = 1e-10) const { return max_violation <= tol && anchor_gap <= tol; }
};

// Samples points around the anchor (retraction of random tangents with
// length up to `radius`) unless a sampler is supplied.
MajorizationReport check_majorization(const SurrogateInstance& surrogate, int samples, double c,
                                      double phi_power, std::uint64_t seed, double radius = 1.0,
                                      const std::function<Point(Rng&)>& sampler = {});

}  // namespace rbmm
