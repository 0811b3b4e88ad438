#include "rbmm/constraints.hpp"

#include <cmath>

#include "rbmm/errors.hpp"

namespace rbmm {

namespace {

constexpr double kBoundaryRel = 1e-9;

Point center_point(const Constraint& c, const Point& x) { return {x.manifold, c.center}; }

}  // namespace

Constraint Constraint::whole() { return {}; }

Constraint Constraint::euclidean_ball(Matrix center, double radius) {
  if (!(radius > 0.0)) throw ContractViolation("euclidean_ball: radius must be positive");
  return {ConstraintKind::EuclideanBall, std::move(center), radius};
}

Constraint Constraint::geodesic_ball(Matrix center, double radius) {
  if (!(radius > 0.0)) throw ContractViolation("geodesic_ball: radius must be positive");
  return {ConstraintKind::GeodesicBall, std::move(center), radius};
}

void check_constraint(const Constraint& c, const Manifold& m) {
  if (c.kind == ConstraintKind::WholeManifold) return;
  if (c.center.rows() != m.rows() || c.center.cols() != m.cols())
    throw ContractViolation("constraint center shape does not match " + m.describe());
  if (c.kind == ConstraintKind::EuclideanBall && m.kind() != ManifoldKind::Euclidean)
    throw UnsupportedKind("Euclidean ball constraint needs a Euclidean block, got " + m.describe());
  if (c.kind == ConstraintKind::GeodesicBall) {
    if (!m.has_exp_log())
      throw UnsupportedKind("geodesic ball needs a log map, unavailable on " + m.describe());
    if (m.kind() == ManifoldKind::Sphere && c.radius >= 0.5 * m.injectivity_floor())
      throw ContractViolation("geodesic ball on the sphere must have radius below pi/2");
    if (!is_valid_point({m, c.center}, 1e-8))
      throw ContractViolation("geodesic ball center is not a point of " + m.describe());
  }
}

double center_distance(const Constraint& c, const Point& x) {
  switch (c.kind) {
    case ConstraintKind::WholeManifold: return 0.0;
    case ConstraintKind::EuclideanBall: return (x.data - c.center).norm();
    case ConstraintKind::GeodesicBall: return dist(center_point(c, x), x);
  }
  return 0.0;
}

bool satisfies(const Constraint& c, const Point& x, double rel_tol) {
  if (c.kind == ConstraintKind::WholeManifold) return true;
  return center_distance(c, x) <= c.radius * (1.0 + rel_tol);
}

bool on_boundary(const Constraint& c, const Point& x) {
  if (c.kind == ConstraintKind::WholeManifold) return false;
  return c.radius - center_distance(c, x) <= kBoundaryRel * c.radius;
}

std::optional<TangentVector> outward_normal(const Constraint& c, const Point& x) {
  if (!on_boundary(c, x)) return std::nullopt;
  if (c.kind == ConstraintKind::EuclideanBall) {
    const Matrix r = x.data - c.center;
    return TangentVector{x, r / r.norm()};
  }
  // grad of d(., center) at x is -log_x(center)/d.
  TangentVector v = log_map(x, center_point(c, x));
  const double n = norm(x, v);
  return scale(v, -1.0 / n);
}

TangentVector project_cone(const Constraint& c, const Point& x, const TangentVector& v) {
  const auto n = outward_normal(c, x);
  if (!n) return v;
  const double a = inner(x, v, *n);
  if (a <= 0.0) return v;
  return {x, v.data - a * n->data};
}

Point pull_back(const Constraint& c, const Point& x) {
  if (c.kind == ConstraintKind::WholeManifold) return x;
  const double d = center_distance(c, x);
  if (d <= c.radius) return x;
  const double t = c.radius / d;
  if (c.kind == ConstraintKind::EuclideanBall) return {x.manifold, c.center + t * (x.data - c.center)};
  const Point o = center_point(c, x);
  return exp_map(o, scale(log_map(o, x), t));
}

}  // namespace rbmm
