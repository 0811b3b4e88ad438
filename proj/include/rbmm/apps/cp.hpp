#pragma once

// Rank-R CP decomposition of an order-m tensor with per-factor constraints.

#include <cstdint>
#include <vector>

#include "rbmm/problem.hpp"
#include "rbmm/surrogates.hpp"

namespace rbmm::apps::cp {

// Dense tensor, row-major (last index fastest).
struct Tensor {
  std::vector<Index> dims;
  Vector data;

  static Tensor zeros(std::vector<Index> dims);
  Index order() const { return static_cast<Index>(dims.size()); }
};

enum class FactorConstraint { Euclidean, Stiefel, FixedRank };

// Mode-i unfolding: I_i rows; columns run over the remaining indices in
// row-major order.
Matrix unfold(const Tensor& x, std::size_t mode);
// Khatri-Rao product of all factors except `skip`, rows ordered to match
// unfold(., skip), so that unfold(X, i) = U_i B^T for X = [[U]].
Matrix khatri_rao(const std::vector<Matrix>& factors, std::size_t skip);
Tensor reconstruct(const std::vector<Matrix>& factors);
double objective(const Tensor& x, const std::vector<Matrix>& factors);
double relative_error(const Tensor& x, const std::vector<Matrix>& factors);

struct Generated {
  Tensor tensor;
  std::vector<Matrix> factors;
};

// Draw order: factors U_1..U_m (I_i x R Gaussians; a Stiefel first factor is
// orthonormalized, a fixed-rank first factor is A (I_1 x r) times C (r x R)),
// then Gaussian noise over the tensor entries when noise > 0.
Generated cp_generate(const std::vector<Index>& dims, Index rank, double noise, Rng& rng,
                      FactorConstraint first = FactorConstraint::Euclidean, Index fixed_rank = 0);

struct Setup {
  BlockProblem problem;
  std::vector<SurrogateSpec> specs;
};

// `lambda` is the weight of lambda_n ||U - U_prev||^2 in the block surrogate;
// `proximal` = false gives ALS (exact block minimization).
Setup cp_build(const Tensor& x, Index rank, FactorConstraint first, Index fixed_rank,
               Schedule lambda, bool proximal);
ProductPoint random_factors(const Tensor& x, Index rank, FactorConstraint first, Index fixed_rank,
                            Rng& rng);
std::vector<Matrix> factors_of(const ProductPoint& state);

}  // namespace rbmm::apps::cp
