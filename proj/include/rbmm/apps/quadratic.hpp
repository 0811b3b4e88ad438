#pragma once

// Two scalar blocks, f(a, b) = (a - 1)^2 + (b - 2)^2 + a b.
// Unique stationary point (0, 2) with f = 1.

#include "rbmm/problem.hpp"
#include "rbmm/surrogates.hpp"

namespace rbmm::apps::quadratic {

BlockProblem problem();
ProductPoint initial_point(double a, double b);

// Euclidean proximal surrogate with its closed-form minimizer.
SurrogateSpec proximal_spec(Schedule lambda);
// Exact block minimization.
SurrogateSpec exact_spec();

}  // namespace rbmm::apps::quadratic
