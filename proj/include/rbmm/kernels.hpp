#pragma once

// Flat-array kernels behind the geometry and application hot paths.
// Each kernel has a scalar reference and an AVX2/FMA variant; the variant
// is chosen once at startup from CPUID and can be pinned for testing.

#include <cstddef>

#include <Eigen/Dense>

namespace rbmm::kernels {

enum class Isa { Scalar, Avx2 };

bool avx2_available();
Isa active_isa();
// Throws ContractViolation when asking for AVX2 on a CPU without it.
void set_isa(Isa isa);
const char* isa_name(Isa isa);

double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
// out[i] = clamp(s[i] / denom, -bound, bound)
void clip_ratio(const double* s, std::size_t n, double denom, double bound, double* out);
// Sum of the smoothed absolute value: s^2/(2 sigma) inside |s| <= lambda*sigma,
// lambda*|s| - sigma*lambda^2/2 outside.
double huber_sum(const double* s, std::size_t n, double sigma, double lambda);
// out[i] = b[i] - mu * clamp(b[i] / (sigma + mu), -lambda, lambda)
void huber_shrink(const double* b, std::size_t n, double mu, double sigma, double lambda,
                  double* out);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void clip_ratio(const double* s, std::size_t n, double denom, double bound, double* out);
double huber_sum(const double* s, std::size_t n, double sigma, double lambda);
void huber_shrink(const double* b, std::size_t n, double mu, double sigma, double lambda,
                  double* out);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void clip_ratio(const double* s, std::size_t n, double denom, double bound, double* out);
double huber_sum(const double* s, std::size_t n, double sigma, double lambda);
void huber_shrink(const double* b, std::size_t n, double mu, double sigma, double lambda,
                  double* out);
}  // namespace avx2

// Eigen conveniences over the dispatched kernels.
double frobenius_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
double frobenius_distance_sq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace rbmm::kernels
