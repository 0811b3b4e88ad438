#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace rbmm {

using Rng = std::mt19937_64;

// Matrix of i.i.d. standard normals, filled in column-major order.
inline Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Independent stream for trial `index` of a run seeded with `seed`.
inline Rng trial_rng(std::uint64_t seed, std::uint64_t index) { return Rng(seed + index); }

}  // namespace rbmm
