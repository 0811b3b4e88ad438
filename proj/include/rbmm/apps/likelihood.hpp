#pragma once

// Optimistic Gaussian likelihood: minimize over (mu, Sigma) in a Euclidean
// ball times a Fisher-Rao ball
//   f(mu, Sigma) = <S(mu), Sigma^{-1}> + log det Sigma,
//   S(mu) = (1/M) sum_m (x_m - mu)(x_m - mu)^T.

#include <cstdint>
#include <optional>

#include "rbmm/problem.hpp"
#include "rbmm/surrogates.hpp"

namespace rbmm::apps::likelihood {

struct Problem {
  Matrix samples;  // M x N, one sample per row
  Vector mean;     // sample mean
  Matrix cov;      // sample covariance (1/M normalization)
  Vector mu_hat;   // Euclidean ball center
  Matrix sigma_hat;  // Fisher-Rao ball center
  double rho1 = 0.0;
  double rho2 = 0.0;

  Index n() const { return samples.cols(); }
  // (1/M) sum (x_m - mu)(x_m - mu)^T
  Matrix scatter(const Vector& mu) const;
  // Upper bound on the block smoothness constants over the feasible set.
  double smoothness_bound() const;
  // Lower bound on lambda_min(Sigma) over the Fisher-Rao ball.
  double min_eigenvalue_bound() const;
};

// Nominal distribution defaults to the sample moments; rho1 defaults to
// max_m ||x_m - mu_hat||.
Problem ol_make(const Matrix& samples, double rho2, std::optional<double> rho1 = std::nullopt,
                std::optional<Vector> mu_hat = std::nullopt,
                std::optional<Matrix> sigma_hat = std::nullopt);

// Nominal moments estimated from the first `train` rows; the objective
// scores the remaining rows.
Problem ol_make_split(const Matrix& samples, Index train, double rho2);

// Draw order: Gaussian N x N factor A for Sigma_true = A A^T / N + I/2,
// Gaussian mean (N x 1), then M x N standard normals mapped through chol(Sigma_true).
Matrix ol_generate(Index n, Index m, Rng& rng);
Matrix ol_generate(Index n, Index m, std::uint64_t seed);

double objective(const Problem& p, const Vector& mu, const Matrix& sigma);

BlockProblem ol_build(const Problem& p);
// Proximal surrogates: Euclidean proximal on mu (closed form inside the
// ball), Riemannian proximal on Sigma (inner Armijo descent). lambda = 0
// gives exact block minimization.
std::vector<SurrogateSpec> ol_specs(const Problem& p, Schedule lambda, Schedule inner_tol,
                                    int inner_budget = 500);
// Feasible start: mu and Sigma pushed halfway to the ball boundaries along
// random directions.
ProductPoint ol_initial_point(const Problem& p, Rng& rng);

}  // namespace rbmm::apps::likelihood
