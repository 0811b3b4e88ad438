#pragma once

#include <initializer_list>

#include "rbmm/geometry.hpp"

namespace rbmm::test {

inline Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

inline Point point(const Manifold& m, const Matrix& data) { return make_point(m, data); }

inline double frob(const Matrix& a, const Matrix& b) { return (a - b).norm(); }

// Seeded stream of instances for property tests.
template <class Gen>
void for_seeds(int count, Gen&& gen) {
  for (int s = 0; s < count; ++s) {
    Rng rng(1000 + static_cast<std::uint64_t>(s));
    gen(rng);
  }
}

}  // namespace rbmm::test
