#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rbmm/geometry.hpp"
#include "rbmm/problem.hpp"

namespace rbmm {

struct ProbeReport {
  std::string quantity;
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  double target = 0.0;
  // How `max` (or `min` for "min_at_least") is compared with the target.
  std::string comparison;
  bool pass = false;
  int samples = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

using ValueFn = std::function<double(const Point&)>;
using RgradFn = std::function<TangentVector(const Point&)>;

// Central differences through the retraction along `directions` random unit
// tangents; error is |fd - <grad, eta>| / max(||grad||, 1e-12).
ProbeReport fd_gradient_check(const ValueFn& value, const RgradFn& rgrad, const Point& x,
                              double h = 1e-5, std::uint64_t seed = 0, int directions = 20,
                              double threshold = 1e-4, std::string quantity = "fd_gradient");

// Empirical g-smoothness ratio ||grad F(x) - transport_{y->x} grad F(y)|| / d(x, y).
// Passes when max ratio is within `tolerance` of `target`.
ProbeReport gsmooth_probe(const Manifold& manifold, const RgradFn& rgrad,
                          const std::vector<std::pair<Point, Point>>& pairs, double target,
                          double tolerance, std::uint64_t seed = 0,
                          std::string quantity = "gsmooth_ratio");
// Random pairs: uniform x, then y at geodesic distance up to max_dist.
std::vector<std::pair<Point, Point>> random_pairs(const Manifold& manifold, int count,
                                                  double max_dist, std::uint64_t seed);
// p, x, y at mutual angles 2 pi / 3 on the unit circle, with p = (1, 0).
std::pair<Point, Point> circle_equilateral_pair();

// Chord versus geodesic distance on sampled pairs. Sphere: passes when
// chord <= arc on every pair. SPD (pairs inside a ball of radius `radius`
// around the identity): passes when both ratio bounds are positive and finite.
ProbeReport distance_equivalence_probe(const Manifold& manifold, int samples, std::uint64_t seed,
                                       double radius = 1.0);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// OLS of log a_n on log n (n from 1), after dropping the first 10%.
RateFit rate_fit(const std::vector<double>& sequence);
// Prefix of the sequence before it first reaches `floor`.
std::vector<double> truncate_at_floor(const std::vector<double>& sequence, double floor);

// Geometry invariants on one manifold kind: exp/log round trip, transport
// isometry, grad of squared distance against finite differences, retraction
// agreement with exp, and (where applicable) distance equivalence and
// projection optimality.
std::vector<ProbeReport> geometry_suite(const Manifold& manifold, int samples, std::uint64_t seed);

// fd_gradient_check of every block gradient of a problem at `state`.
std::vector<ProbeReport> problem_gradient_probes(const BlockProblem& problem,
                                                 const ProductPoint& state, std::uint64_t seed,
                                                 double h = 1e-5);

}  // namespace rbmm
