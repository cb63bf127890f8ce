#include "pelp/kernels.hpp"

#if defined(PELP_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <cmath>

namespace pelp::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double* y, const double* x, double a, size_t n) {
  __m256d va = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double squared_norm_avx2(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double squared_dist_avx2(const double* a, const double* b, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void edge_grad_avx2(double w, const double* ta, const double* tb, double* ga,
                    double* gb, size_t n) {
  __m256d vw = _mm256_set1_pd(w);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_mul_pd(
        vw, _mm256_sub_pd(_mm256_loadu_pd(tb + i), _mm256_loadu_pd(ta + i)));
    _mm256_storeu_pd(ga + i, _mm256_add_pd(_mm256_loadu_pd(ga + i), d));
    _mm256_storeu_pd(gb + i, _mm256_sub_pd(_mm256_loadu_pd(gb + i), d));
  }
  for (; i < n; ++i) {
    double d = w * (tb[i] - ta[i]);
    ga[i] += d;
    gb[i] -= d;
  }
}

bool adam_update_avx2(double* p, double* m, double* v, const double* g,
                      size_t n, const AdamParams& ap) {
  const __m256d b1 = _mm256_set1_pd(ap.beta1);
  const __m256d b2 = _mm256_set1_pd(ap.beta2);
  const __m256d c1 = _mm256_set1_pd(1.0 - ap.beta1);
  const __m256d c2 = _mm256_set1_pd(1.0 - ap.beta2);
  const __m256d inv_bias1 = _mm256_set1_pd(1.0 / ap.bias1);
  const __m256d inv_bias2 = _mm256_set1_pd(1.0 / ap.bias2);
  const __m256d lr = _mm256_set1_pd(ap.lr);
  const __m256d eps = _mm256_set1_pd(ap.eps);
  __m256d finite_acc = _mm256_setzero_pd();

  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gi = _mm256_loadu_pd(g + i);
    __m256d mi = _mm256_fmadd_pd(b1, _mm256_loadu_pd(m + i), _mm256_mul_pd(c1, gi));
    __m256d vi = _mm256_fmadd_pd(b2, _mm256_loadu_pd(v + i),
                                 _mm256_mul_pd(c2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    __m256d mhat = _mm256_mul_pd(mi, inv_bias1);
    __m256d vhat = _mm256_mul_pd(vi, inv_bias2);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), eps);
    __m256d pi = _mm256_add_pd(
        _mm256_loadu_pd(p + i),
        _mm256_div_pd(_mm256_mul_pd(lr, mhat), denom));
    _mm256_storeu_pd(p + i, pi);
    // NaN/Inf detection: x - x is 0 for finite x, NaN otherwise
    finite_acc = _mm256_or_pd(finite_acc, _mm256_sub_pd(pi, pi));
  }
  // accumulator is 0 in every lane iff all updated values were finite
  double probe = hsum(finite_acc);
  bool finite = probe == 0.0;
  for (; i < n; ++i) {
    double gi = g[i];
    m[i] = ap.beta1 * m[i] + (1.0 - ap.beta1) * gi;
    v[i] = ap.beta2 * v[i] + (1.0 - ap.beta2) * gi * gi;
    double mhat = m[i] / ap.bias1;
    double vhat = v[i] / ap.bias2;
    p[i] += ap.lr * mhat / (std::sqrt(vhat) + ap.eps);
    finite = finite && std::isfinite(p[i]);
  }
  return finite;
}

}  // namespace

const KernelTable avx2_table = {
    "avx2",      dot_avx2,        axpy_avx2,      squared_norm_avx2,
    squared_dist_avx2, edge_grad_avx2, adam_update_avx2,
};

}  // namespace pelp::kernels

#endif  // PELP_HAVE_AVX2_KERNELS
