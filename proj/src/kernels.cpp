#include <atomic>
#include <cstdlib>
#include <cstring>

#include "rbmm/errors.hpp"
#include "rbmm/kernels.hpp"

namespace rbmm::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("RBMM_SIMD"); env && std::strcmp(env, "scalar") == 0)
    return Isa::Scalar;
  return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool avx2_available() {
#if defined(RBMM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::Avx2 && !avx2_available())
    throw ContractViolation("AVX2 kernels requested on a CPU without AVX2/FMA");
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

double dot(const double* a, const double* b, std::size_t n) {
  return active_isa() == Isa::Avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  return active_isa() == Isa::Avx2 ? avx2::squared_distance(a, b, n)
                                   : scalar::squared_distance(a, b, n);
}

void clip_ratio(const double* s, std::size_t n, double denom, double bound, double* out) {
  if (active_isa() == Isa::Avx2)
    avx2::clip_ratio(s, n, denom, bound, out);
  else
    scalar::clip_ratio(s, n, denom, bound, out);
}

double huber_sum(const double* s, std::size_t n, double sigma, double lambda) {
  return active_isa() == Isa::Avx2 ? avx2::huber_sum(s, n, sigma, lambda)
                                   : scalar::huber_sum(s, n, sigma, lambda);
}

void huber_shrink(const double* b, std::size_t n, double mu, double sigma, double lambda,
                  double* out) {
  if (active_isa() == Isa::Avx2)
    avx2::huber_shrink(b, n, mu, sigma, lambda, out);
  else
    scalar::huber_shrink(b, n, mu, sigma, lambda, out);
}

double frobenius_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ContractViolation("frobenius_dot: shape mismatch");
  return dot(a.data(), b.data(), static_cast<std::size_t>(a.size()));
}

double frobenius_distance_sq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ContractViolation("frobenius_distance_sq: shape mismatch");
  return squared_distance(a.data(), b.data(), static_cast<std::size_t>(a.size()));
}

}  // namespace rbmm::kernels
