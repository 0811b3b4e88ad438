#pragma once

#include <limits>
#include <optional>

#include "rbmm/geometry.hpp"

namespace rbmm {

enum class ConstraintKind { WholeManifold, EuclideanBall, GeodesicBall };

struct Constraint {
  ConstraintKind kind = ConstraintKind::WholeManifold;
  Matrix center;
  double radius = std::numeric_limits<double>::infinity();

  static Constraint whole();
  static Constraint euclidean_ball(Matrix center, double radius);
  // Only on kinds with a log map.
  static Constraint geodesic_ball(Matrix center, double radius);
};

// Throws if the constraint cannot live on this manifold.
void check_constraint(const Constraint& c, const Manifold& m);

// Ball distance from the center (Frobenius or geodesic); 0 for WholeManifold.
double center_distance(const Constraint& c, const Point& x);
bool satisfies(const Constraint& c, const Point& x, double rel_tol = 1e-9);
// On the boundary when the gap to the sphere is at most 1e-9 of the radius.
bool on_boundary(const Constraint& c, const Point& x);

// Unit outward normal at a boundary point, as a tangent vector at x.
std::optional<TangentVector> outward_normal(const Constraint& c, const Point& x);

// Tangent-cone projection: removes the outward radial part of v at a
// boundary point; identity in the interior.
TangentVector project_cone(const Constraint& c, const Point& x, const TangentVector& v);

// Radial pullback into the ball: Euclidean scaling about the center, or
// scaling of the log-map vector in normal coordinates at the center.
Point pull_back(const Constraint& c, const Point& x);

}  // namespace rbmm
