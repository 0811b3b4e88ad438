#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbmm/rng.hpp"

namespace rbmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ManifoldKind { Euclidean, Sphere, Stiefel, SPD, FixedRank };

const char* kind_name(ManifoldKind kind);

// Shape and kind of one block. FixedRank is the rank-r matrices seen as a
// constraint set inside the Euclidean ambient: its metric, distance and
// injectivity floor are the ambient ones.
class Manifold {
 public:
  static Manifold euclidean(Index rows, Index cols = 1);
  // Unit sphere in R^dim, points stored as dim x 1 columns.
  static Manifold sphere(Index dim);
  static Manifold stiefel(Index n, Index k);
  static Manifold spd(Index n);
  static Manifold fixed_rank(Index rows, Index cols, Index rank);

  ManifoldKind kind() const { return kind_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index rank() const { return rank_; }

  double injectivity_floor() const;
  // min(r0, 1)
  double r_hat() const;
  // Closed-form exp/log and exact parallel transport.
  bool has_exp_log() const;
  std::string describe() const;

  bool operator==(const Manifold&) const = default;

 private:
  Manifold(ManifoldKind kind, Index rows, Index cols, Index rank)
      : kind_(kind), rows_(rows), cols_(cols), rank_(rank) {}

  ManifoldKind kind_ = ManifoldKind::Euclidean;
  Index rows_ = 0;
  Index cols_ = 0;
  Index rank_ = 0;
};

struct Point {
  Manifold manifold;
  Matrix data;
};

struct TangentVector {
  Point base;
  Matrix data;
};

struct ProductPoint {
  std::vector<Point> blocks;

  std::size_t size() const { return blocks.size(); }
  Point& operator[](std::size_t i) { return blocks[i]; }
  const Point& operator[](std::size_t i) const { return blocks[i]; }
};

// Validating constructors. Tolerance applies to the invariant residual.
Point make_point(const Manifold& manifold, Matrix data, double tol = 1e-10);
TangentVector make_tangent(const Point& base, Matrix data, double tol = 1e-10);
bool is_valid_point(const Point& x, double tol = 1e-10);
double tangent_residual(const TangentVector& v);
TangentVector zero_tangent(const Point& x);

double inner(const Point& x, const TangentVector& u, const TangentVector& v);
double norm(const Point& x, const TangentVector& u);
TangentVector proj_tangent(const Point& x, const Matrix& v);
TangentVector egrad_to_rgrad(const Point& x, const Matrix& egrad);
TangentVector scale(const TangentVector& u, double a);
TangentVector add(const TangentVector& u, const TangentVector& v);

Point retract(const Point& x, const TangentVector& eta);
Point exp_map(const Point& x, const TangentVector& eta);
TangentVector log_map(const Point& x, const Point& y);
TangentVector transport(const Point& x, const Point& y, const TangentVector& u);
double dist(const Point& x, const Point& y);
double dist(const ProductPoint& x, const ProductPoint& y);
// Riemannian gradient of d^2(., p) at x, i.e. -2 log_x(p).
TangentVector grad_dist_sq(const Point& x, const Point& p);
Point proj_manifold(const Manifold& manifold, const Matrix& x);

// Seeded samplers used by tests and diagnostics.
Point random_point(const Manifold& manifold, Rng& rng);
// Unit-norm tangent vector in the manifold metric.
TangentVector random_unit_tangent(const Point& x, Rng& rng);

namespace spd {
// Spectral functions of a symmetric matrix; eigenvalues below 1e-12 throw
// DegenerateInput wherever the function needs positivity.
Matrix sqrt(const Matrix& a);
Matrix inv_sqrt(const Matrix& a);
Matrix log(const Matrix& a);
Matrix exp(const Matrix& a);
Matrix inverse(const Matrix& a);
double min_eigenvalue(const Matrix& a);
double max_eigenvalue(const Matrix& a);
Matrix sym(const Matrix& a);
}  // namespace spd

}  // namespace rbmm
