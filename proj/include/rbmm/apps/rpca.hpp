#pragma once

// Robust PCA with a hard rank constraint and a smoothed l1 penalty:
//   F(L, S) = g_sigma(S) + (1/(2 mu)) ||M - L - S||_F^2,  rank(L) = r.

#include <cstdint>

#include "rbmm/problem.hpp"
#include "rbmm/surrogates.hpp"

namespace rbmm::apps::rpca {

struct Params {
  Index rank = 2;
  double sparsity = 0.1;   // weight lambda on the l1 term
  double fidelity = 1.0;   // mu
  double smoothing = 1e-2; // sigma
};

// Smoothed l1: max over |z| <= lambda of <z, S> - (sigma/2)||z||^2.
double g_sigma(const Matrix& s, double lambda, double sigma);
// Its maximizer clamp(S/sigma, -lambda, lambda), which is also grad g_sigma.
Matrix z_sigma(const Matrix& s, double lambda, double sigma);

// Rank-r projection of ((M - S)/mu + prox L_k) / (1/mu + prox).
Matrix l_update(const Matrix& m, const Matrix& s, const Matrix& l_prev, const Params& p, double prox);
// Entrywise minimizer of g_sigma(S) + (1/(2mu))||M - L - S||^2 + (prox/2)||S - S_k||^2.
Matrix s_update(const Matrix& m, const Matrix& l, const Matrix& s_prev, const Params& p, double prox);

double objective(const Matrix& m, const Matrix& l, const Matrix& s, const Params& p);

struct Generated {
  Matrix observed;
  Matrix low_rank;
  Matrix sparse;
};

// Draw order: A (rows x r), B (cols x r) Gaussians, then for each entry in
// column-major order a uniform for the support test and, when selected, a
// uniform for the sign.
Generated rpca_generate(Index rows, Index cols, Index rank, double corruption, Rng& rng);

struct Setup {
  BlockProblem problem;
  std::vector<SurrogateSpec> specs;
};

// Blocks: L on FixedRank(rows, cols, r), S on Euclidean(rows, cols).
// Euclidean proximal surrogates with weight `prox`; prox = 0 is block minimization.
Setup rpca_build(const Matrix& observed, const Params& p, Schedule prox);
// L = rank-r projection of M, S = 0.
ProductPoint rpca_initial_point(const Matrix& observed, const Params& p);

}  // namespace rbmm::apps::rpca
