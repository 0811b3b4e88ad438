#pragma once

// Tracking a subspace that moves along a Grassmann geodesic
// U(t) = H cos(Theta t) + Y sin(Theta t), observed through X_i = U(t_i) G_i + N_i.
// Blocks: Q = [H, Y] on Stiefel(d, 2k) and the k principal angles in R^k.

#include <cstdint>
#include <vector>

#include "rbmm/problem.hpp"
#include "rbmm/surrogates.hpp"

namespace rbmm::apps::subspace {

struct GeodesicModel {
  Matrix h;
  Matrix y;
  Vector theta;

  Index d() const { return h.rows(); }
  Index k() const { return h.cols(); }
  Matrix frame(double t) const;
  Matrix q() const;
  static GeodesicModel from_q(const Matrix& q, const Vector& theta);
};

struct Data {
  std::vector<Matrix> x;    // d x ell each
  std::vector<double> t;    // observation times in [0, 1]
  std::vector<Matrix> cov;  // X_i X_i^T

  static Data make(std::vector<Matrix> x, std::vector<double> t);
  Index d() const { return x.empty() ? 0 : x.front().rows(); }
};

struct Generated {
  Data data;
  GeodesicModel truth;
};

// Draw order: Gaussian d x 2k (QR gives H then Y), k angles uniform on
// [0, max_angle), then per observation G_i (k x ell) followed by N_i (d x ell).
Generated st_generate(Index d, Index k, Index T, Index ell, double noise, Rng& rng,
                      double max_angle = 1.0);
Generated st_generate(Index d, Index k, Index T, Index ell, double noise, std::uint64_t seed,
                      double max_angle = 1.0);

// Per (observation i, angle j) constants of the separable angle objective.
struct ThetaCoefficients {
  Matrix alpha, beta, gamma, r, phi, b;  // T x k
  Vector lipschitz;                      // 4 sum_i r_ij t_i^2
};

ThetaCoefficients st_theta_coefficients(const Matrix& h, const Matrix& y, const Data& data);

double objective(const Matrix& q, const Vector& theta, const Data& data);
// Same value through the coefficients: -sum_ij (r cos(2 theta_j t_i - phi) + b).
double separable_objective(const ThetaCoefficients& c, const Vector& theta, const Data& data);
Matrix grad_q(const Matrix& q, const Vector& theta, const Data& data);
Vector grad_theta(const ThetaCoefficients& c, const Vector& theta, const Data& data);

struct Update {
  Matrix q;
  Vector theta;
};

// One cycle: Q <- proj(lambda_q Q - grad_Q f), then each angle takes a
// prox-linear step with weight L_j + lambda_theta at the new Q.
Update st_block_update(const Matrix& q, const Vector& theta, const Data& data, double lambda_q,
                       double lambda_theta);

// Root-mean-square projector distance over an equispaced grid on [0, 1],
// normalized to lie in [0, 1].
double st_geodesic_error(const GeodesicModel& estimate, const GeodesicModel& truth, int grid_points);

BlockProblem st_problem(const Data& data, Index k);
SurrogateSpec q_spec(Schedule lambda_q);
SurrogateSpec theta_spec(const Data& data, Schedule lambda_theta);
ProductPoint to_state(const GeodesicModel& model);
GeodesicModel from_state(const ProductPoint& state);
ProductPoint random_state(Index d, Index k, Rng& rng, double max_angle = 1.0);

}  // namespace rbmm::apps::subspace
