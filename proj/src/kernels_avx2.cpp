#include <algorithm>
#include <cmath>

#include "rbmm/kernels.hpp"

#if defined(RBMM_HAVE_AVX2)
#include <immintrin.h>
#endif

namespace rbmm::kernels::avx2 {

#if defined(RBMM_HAVE_AVX2)

namespace {

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

const __m256d kAbsMask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d, d, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void clip_ratio(const double* s, std::size_t n, double denom, double bound, double* out) {
  const __m256d vd = _mm256_set1_pd(denom);
  const __m256d hi = _mm256_set1_pd(bound);
  const __m256d lo = _mm256_set1_pd(-bound);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d q = _mm256_div_pd(_mm256_loadu_pd(s + i), vd);
    _mm256_storeu_pd(out + i, _mm256_min_pd(_mm256_max_pd(q, lo), hi));
  }
  for (; i < n; ++i) out[i] = std::clamp(s[i] / denom, -bound, bound);
}

double huber_sum(const double* s, std::size_t n, double sigma, double lambda) {
  const double knee = lambda * sigma;
  const double offset = 0.5 * sigma * lambda * lambda;
  const __m256d vknee = _mm256_set1_pd(knee);
  const __m256d vtwo_sigma = _mm256_set1_pd(2.0 * sigma);
  const __m256d vlambda = _mm256_set1_pd(lambda);
  const __m256d voffset = _mm256_set1_pd(offset);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_and_pd(_mm256_loadu_pd(s + i), kAbsMask);
    const __m256d inner = _mm256_div_pd(_mm256_mul_pd(a, a), vtwo_sigma);
    const __m256d outer = _mm256_sub_pd(_mm256_mul_pd(vlambda, a), voffset);
    const __m256d inside = _mm256_cmp_pd(a, vknee, _CMP_LE_OQ);
    acc = _mm256_add_pd(acc, _mm256_blendv_pd(outer, inner, inside));
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    const double a = std::abs(s[i]);
    total += a <= knee ? (a * a) / (2.0 * sigma) : lambda * a - offset;
  }
  return total;
}

void huber_shrink(const double* b, std::size_t n, double mu, double sigma, double lambda,
                  double* out) {
  const double denom = sigma + mu;
  const __m256d vd = _mm256_set1_pd(denom);
  const __m256d vmu = _mm256_set1_pd(mu);
  const __m256d hi = _mm256_set1_pd(lambda);
  const __m256d lo = _mm256_set1_pd(-lambda);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(b + i);
    const __m256d c = _mm256_min_pd(_mm256_max_pd(_mm256_div_pd(x, vd), lo), hi);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(x, _mm256_mul_pd(vmu, c)));
  }
  for (; i < n; ++i) out[i] = b[i] - mu * std::clamp(b[i] / denom, -lambda, lambda);
}

#else

double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
double squared_distance(const double* a, const double* b, std::size_t n) {
  return scalar::squared_distance(a, b, n);
}
void clip_ratio(const double* s, std::size_t n, double denom, double bound, double* out) {
  scalar::clip_ratio(s, n, denom, bound, out);
}
double huber_sum(const double* s, std::size_t n, double sigma, double lambda) {
  return scalar::huber_sum(s, n, sigma, lambda);
}
void huber_shrink(const double* b, std::size_t n, double mu, double sigma, double lambda,
                  double* out) {
  scalar::huber_shrink(b, n, mu, sigma, lambda, out);
}

#endif

}  // namespace rbmm::kernels::avx2
