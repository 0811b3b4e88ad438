#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "rbmm/constraints.hpp"
#include "rbmm/geometry.hpp"

namespace rbmm {

// Objective over a product of blocks, with per-block Euclidean gradients.
struct BlockProblem {
  std::vector<Manifold> manifolds;
  std::vector<Constraint> constraints;
  std::function<double(const ProductPoint&)> value;
  std::function<Matrix(const ProductPoint&, std::size_t)> egrad;
  std::optional<double> smoothness;

  std::size_t blocks() const { return manifolds.size(); }
};

// Objective as a function of one block with the others frozen.
struct Marginal {
  Manifold manifold = Manifold::euclidean(1);
  std::function<double(const Matrix&)> value;
  std::function<Matrix(const Matrix&)> egrad;
  // Frozen snapshot the marginal was cut from; absent for standalone marginals.
  std::shared_ptr<const ProductPoint> state;
  std::size_t block = 0;
  std::optional<double> smoothness;

  double value_at(const Point& x) const { return value(x.data); }
  TangentVector rgrad(const Point& x) const { return egrad_to_rgrad(x, egrad(x.data)); }
};

Marginal marginal_of(const BlockProblem& problem, const ProductPoint& state, std::size_t block);

// Riemannian gradient of the full objective with respect to one block.
TangentVector block_rgrad(const BlockProblem& problem, const ProductPoint& state, std::size_t block);

}  // namespace rbmm
