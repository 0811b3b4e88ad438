#include "rbmm/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rbmm/errors.hpp"
#include "rbmm/kernels.hpp"

namespace rbmm {

namespace {

constexpr int kMaxBacktracks = 60;

bool hadamard(const Manifold& m) {
  return m.kind() == ManifoldKind::Euclidean || m.kind() == ManifoldKind::SPD;
}

double armijo_search(const std::function<double(const Point&)>& g_value, double gx, double slope,
                     const Point& x, const TangentVector& d, double sigma, double beta,
                     const std::function<Point(const Point&)>& feasible) {
  if (!(sigma > 0.0 && sigma < 1.0 && beta > 0.0 && beta < 1.0))
    throw ContractViolation("armijo_step: sigma and beta must lie in (0, 1)");
  if (slope > 0.0) throw ContractViolation("armijo_step: direction is not a descent direction");
  double t = 1.0;
  for (int j = 0; j <= kMaxBacktracks; ++j) {
    Point y = retract(x, scale(d, t));
    if (feasible) y = feasible(y);
    const double gy = g_value(y);
    if (std::isfinite(gy) && gy <= gx + sigma * t * slope) return t;
    t *= beta;
  }
  std::ostringstream os;
  os << "armijo_step: no acceptable step after " << kMaxBacktracks
     << " backtracks (slope " << slope << ")";
  throw LineSearchFailure(os.str());
}

double strong_convexity(const SurrogateInstance& s, const Manifold& m) {
  const SurrogateSpec& spec = s.spec();
  if (spec.strong_convexity) return std::max(0.0, spec.strong_convexity(s.lambda()));
  const auto& lf = s.marginal().smoothness;
  switch (s.family()) {
    case SurrogateFamily::ProxLinear:
      if (m.kind() == ManifoldKind::Euclidean) return std::max(0.0, s.weights().minCoeff());
      return 0.0;
    case SurrogateFamily::EuclideanProximal:
      if (m.kind() == ManifoldKind::Euclidean && lf) return std::max(0.0, s.lambda() - *lf);
      return 0.0;
    case SurrogateFamily::RiemannianProximal:
      if (hadamard(m) && lf) return std::max(0.0, s.lambda() - *lf);
      return 0.0;
    default: return 0.0;
  }
}

std::optional<Point> closed_form(const SurrogateInstance& s, const Constraint& c,
                                 const Manifold& m) {
  const Point& a = s.anchor();
  switch (s.family()) {
    case SurrogateFamily::ProxLinear: {
      const Matrix& w = s.weights();
      const bool whole = c.kind == ConstraintKind::WholeManifold;
      if (w.maxCoeff() == 0.0) {
        // Pure linear model: minimizer exists only on compact kinds.
        if (whole && (m.kind() == ManifoldKind::Stiefel || m.kind() == ManifoldKind::Sphere))
          return proj_manifold(m, -s.anchor_egrad());
        if (m.kind() == ManifoldKind::Euclidean && whole)
          throw DegenerateInput("prox-linear surrogate with zero weight is unbounded below");
        return std::nullopt;
      }
      if (w.minCoeff() <= 0.0) return std::nullopt;
      const Matrix target = a.data - s.anchor_egrad().cwiseQuotient(w);
      if (m.kind() == ManifoldKind::Euclidean) {
        if (whole) return Point{m, target};
        if (c.kind == ConstraintKind::EuclideanBall && s.uniform_weights())
          return pull_back(c, Point{m, target});
        return std::nullopt;
      }
      if (whole && s.uniform_weights() &&
          (m.kind() == ManifoldKind::Stiefel || m.kind() == ManifoldKind::Sphere ||
           m.kind() == ManifoldKind::FixedRank))
        return proj_manifold(m, target);
      return std::nullopt;
    }
    case SurrogateFamily::RegularizedLinearStiefel:
      if (c.kind != ConstraintKind::WholeManifold) return std::nullopt;
      return proj_manifold(m, s.r_matrix() + s.lambda() * a.data);
    default: return std::nullopt;
  }
}

}  // namespace

const char* family_name(SurrogateFamily family) {
  switch (family) {
    case SurrogateFamily::RiemannianProximal: return "riemannian-proximal";
    case SurrogateFamily::EuclideanProximal: return "euclidean-proximal";
    case SurrogateFamily::ProxLinear: return "prox-linear";
    case SurrogateFamily::RegularizedLinearStiefel: return "regularized-linear-stiefel";
    case SurrogateFamily::Identity: return "identity";
  }
  return "unknown";
}

Schedule constant_schedule(double value) {
  return [value](int) { return value; };
}

Schedule geometric_schedule(double initial, double ratio) {
  return [initial, ratio](int cycle) { return initial * std::pow(ratio, cycle); };
}

SurrogateSpec SurrogateSpec::riemannian_proximal(Schedule lambda) {
  SurrogateSpec s;
  s.family = SurrogateFamily::RiemannianProximal;
  s.lambda = std::move(lambda);
  return s;
}

SurrogateSpec SurrogateSpec::euclidean_proximal(Schedule lambda) {
  SurrogateSpec s;
  s.family = SurrogateFamily::EuclideanProximal;
  s.lambda = std::move(lambda);
  return s;
}

SurrogateSpec SurrogateSpec::prox_linear(Schedule lambda, AnchorMap curvature) {
  SurrogateSpec s;
  s.family = SurrogateFamily::ProxLinear;
  s.lambda = std::move(lambda);
  s.curvature = std::move(curvature);
  return s;
}

SurrogateSpec SurrogateSpec::regularized_linear_stiefel(Schedule lambda, AnchorMap r_map) {
  SurrogateSpec s;
  s.family = SurrogateFamily::RegularizedLinearStiefel;
  s.lambda = std::move(lambda);
  s.r_map = std::move(r_map);
  return s;
}

SurrogateSpec SurrogateSpec::identity() { return SurrogateSpec{}; }

SurrogateInstance::SurrogateInstance(SurrogateSpec spec, Marginal marginal, Point anchor, int cycle)
    : spec_(std::move(spec)),
      marginal_(std::move(marginal)),
      anchor_(std::move(anchor)),
      cycle_(cycle),
      lambda_(spec_.lambda ? spec_.lambda(cycle) : 0.0),
      anchor_value_(0.0) {
  const Manifold& m = anchor_.manifold;
  if (!(m == marginal_.manifold))
    throw ContractViolation("build_surrogate: anchor manifold differs from the marginal's");
  if (!std::isfinite(lambda_) || lambda_ < 0.0)
    throw ContractViolation("build_surrogate: lambda must be finite and nonnegative");
  if (spec_.family == SurrogateFamily::RiemannianProximal &&
      (m.kind() == ManifoldKind::Stiefel || m.kind() == ManifoldKind::FixedRank))
    throw UnsupportedKind("Riemannian proximal surrogate needs a geodesic distance, unavailable on " +
                          m.describe());
  if (spec_.family == SurrogateFamily::RegularizedLinearStiefel &&
      m.kind() != ManifoldKind::Stiefel)
    throw UnsupportedKind("regularized linear surrogate is defined on Stiefel blocks only, got " +
                          m.describe());
  anchor_value_ = marginal_.value(anchor_.data);
  if (spec_.family == SurrogateFamily::ProxLinear) {
    anchor_egrad_ = marginal_.egrad(anchor_.data);
    weights_ = Matrix::Constant(m.rows(), m.cols(), lambda_);
    if (spec_.curvature) {
      const Matrix w = spec_.curvature(marginal_, anchor_);
      if (w.size() == 1) {
        weights_.array() += w(0, 0);
      } else {
        if (w.rows() != m.rows() || w.cols() != m.cols())
          throw ContractViolation("prox-linear curvature has the wrong shape");
        weights_ += w;
        uniform_weights_ = (w.array() == w(0, 0)).all();
      }
      if ((weights_.array() < 0.0).any())
        throw ContractViolation("prox-linear weights must be nonnegative");
    }
  }
  if (spec_.family == SurrogateFamily::RegularizedLinearStiefel)
    r_ = spec_.r_map ? spec_.r_map(marginal_, anchor_) : Matrix(-0.5 * marginal_.egrad(anchor_.data));
}

double SurrogateInstance::value(const Point& x) const {
  switch (spec_.family) {
    case SurrogateFamily::Identity: return marginal_.value(x.data);
    case SurrogateFamily::EuclideanProximal:
      return marginal_.value(x.data) +
             0.5 * lambda_ * kernels::frobenius_distance_sq(x.data, anchor_.data);
    case SurrogateFamily::RiemannianProximal: {
      const double d = dist(x, anchor_);
      return marginal_.value(x.data) + 0.5 * lambda_ * d * d;
    }
    case SurrogateFamily::ProxLinear: {
      const Matrix diff = x.data - anchor_.data;
      return anchor_value_ + kernels::frobenius_dot(anchor_egrad_, diff) +
             0.5 * (weights_.array() * diff.array().square()).sum();
    }
    case SurrogateFamily::RegularizedLinearStiefel: {
      const Matrix diff = x.data - anchor_.data;
      return anchor_value_ - 2.0 * kernels::frobenius_dot(r_, diff) +
             lambda_ * kernels::frobenius_dot(diff, diff);
    }
  }
  throw ContractViolation("surrogate value: unknown family");
}

TangentVector SurrogateInstance::rgrad(const Point& x) const {
  switch (spec_.family) {
    case SurrogateFamily::Identity: return marginal_.rgrad(x);
    case SurrogateFamily::EuclideanProximal:
      return egrad_to_rgrad(x, marginal_.egrad(x.data) + lambda_ * (x.data - anchor_.data));
    case SurrogateFamily::RiemannianProximal:
      if (lambda_ == 0.0) return marginal_.rgrad(x);
      return add(marginal_.rgrad(x), scale(log_map(x, anchor_), -lambda_));
    case SurrogateFamily::ProxLinear:
      return egrad_to_rgrad(
          x, anchor_egrad_ + Matrix(weights_.cwiseProduct(x.data - anchor_.data)));
    case SurrogateFamily::RegularizedLinearStiefel:
      return egrad_to_rgrad(x, -2.0 * r_ + 2.0 * lambda_ * (x.data - anchor_.data));
  }
  throw ContractViolation("surrogate rgrad: unknown family");
}

SurrogateInstance build_surrogate(const SurrogateSpec& spec, const Marginal& marginal,
                                  const Point& anchor, int cycle) {
  return SurrogateInstance(spec, marginal, anchor, cycle);
}

double armijo_step(const std::function<double(const Point&)>& g_value,
                   const std::function<TangentVector(const Point&)>& g_rgrad, const Point& x,
                   const TangentVector& direction, double sigma, double beta,
                   const std::function<Point(const Point&)>& feasible) {
  const double slope = inner(x, g_rgrad(x), direction);
  return armijo_search(g_value, g_value(x), slope, x, direction, sigma, beta, feasible);
}

BlockSolution minimize_block(const SurrogateInstance& s, const Constraint& c, const Manifold& m) {
  if (!(s.anchor().manifold == m))
    throw ContractViolation("minimize_block: surrogate was built on a different manifold");
  check_constraint(c, m);
  const SurrogateSpec& spec = s.spec();

  if (spec.exact) {
    if (auto sol = spec.exact(s.marginal(), s.anchor(), s.lambda())) {
      Point p{m, std::move(*sol)};
      if (satisfies(c, p)) return {std::move(p), 0.0, true, true, true, 0};
    }
  }
  if (spec.allow_closed_form) {
    if (auto p = closed_form(s, c, m)) return {std::move(*p), 0.0, true, true, true, 0};
  }

  const auto g = [&s](const Point& p) { return s.value(p); };
  const auto feasible = [&c](const Point& p) { return pull_back(c, p); };
  const double tol = spec.inner_tol ? spec.inner_tol(s.cycle()) : 1e-10;

  Point x = pull_back(c, s.anchor());
  double gx = g(x);
  BlockSolution out{x, 0.0, true, false, false, 0};
  double dn = 0.0;
  for (int it = 0;; ++it) {
    const TangentVector grad = s.rgrad(x);
    const TangentVector d = project_cone(c, x, scale(grad, -1.0));
    dn = norm(x, d);
    out.inner_iterations = it;
    if (dn <= tol) {
      out.converged = true;
      break;
    }
    if (it >= spec.inner_budget) break;
    // Near a boundary KKT point the cone-projected slope drowns in rounding.
    const double slope = inner(x, grad, d);
    if (!(slope < 0.0)) break;
    double t = 0.0;
    try {
      t = armijo_search(g, gx, slope, x, d, spec.armijo_sigma, spec.armijo_beta, feasible);
    } catch (const LineSearchFailure&) {
      break;
    }
    x = feasible(retract(x, scale(d, t)));
    gx = g(x);
  }
  out.point = x;
  const double alpha = strong_convexity(s, m);
  if (alpha > 0.0) {
    out.delta_bound = dn * dn / (2.0 * alpha);
    out.certified = true;
  } else {
    const double diameter = c.kind == ConstraintKind::WholeManifold
                                ? 2.0 * std::max(1.0, dist(s.anchor(), x))
                                : 2.0 * c.radius;
    out.delta_bound = dn * diameter;
    out.certified = false;
  }
  return out;
}

MajorizationReport check_majorization(const SurrogateInstance& s, int samples, double c,
                                      double phi_power, std::uint64_t seed, double radius,
                                      const std::function<Point(Rng&)>& sampler) {
  if (samples < 1) throw ContractViolation("check_majorization: need at least one sample");
  Rng rng(seed);
  const Point& a = s.anchor();
  MajorizationReport rep;
  rep.samples = samples;
  rep.c = c;
  rep.anchor_gap = std::abs(s.value(a) - s.marginal().value(a.data));
  rep.max_violation = -std::numeric_limits<double>::infinity();
  rep.min_growth_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    Point p = sampler ? sampler(rng)
                      : retract(a, scale(random_unit_tangent(a, rng), radius * uniform(rng, 0.0, 1.0)));
    const double gap = s.value(p) - s.marginal().value(p.data);
    rep.max_violation = std::max(rep.max_violation, -gap);
    const double d = dist(p, a);
    if (d > 1e-12) rep.min_growth_ratio = std::min(rep.min_growth_ratio, gap / std::pow(d, phi_power));
  }
  rep.growth_ok = rep.min_growth_ratio >= c;
  return rep;
}

}  // namespace rbmm
