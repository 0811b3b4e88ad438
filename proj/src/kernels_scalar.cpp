#include <algorithm>
#include <cmath>

#include "rbmm/kernels.hpp"

namespace rbmm::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void clip_ratio(const double* s, std::size_t n, double denom, double bound, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(s[i] / denom, -bound, bound);
}

double huber_sum(const double* s, std::size_t n, double sigma, double lambda) {
  const double knee = lambda * sigma;
  const double offset = 0.5 * sigma * lambda * lambda;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(s[i]);
    total += a <= knee ? (a * a) / (2.0 * sigma) : lambda * a - offset;
  }
  return total;
}

void huber_shrink(const double* b, std::size_t n, double mu, double sigma, double lambda,
                  double* out) {
  const double denom = sigma + mu;
  for (std::size_t i = 0; i < n; ++i)
    out[i] = b[i] - mu * std::clamp(b[i] / denom, -lambda, lambda);
}

}  // namespace rbmm::kernels::scalar
