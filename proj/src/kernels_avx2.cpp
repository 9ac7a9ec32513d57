// Copyright 2026 The sdslab Authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2+FMA variants of the arithmetic kernels. This translation unit is the
// only one compiled with -mavx2 -mfma; callers reach it through the runtime
// dispatch table in kernels.cpp.
#include <immintrin.h>

#include <cmath>

#include "sdslab/kernels.hpp"

namespace sdslab::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// exp(x) for x in [-690, 690]: Cody-Waite range reduction against ln 2 and a
// degree-14 Taylor polynomial on the reduced argument |r| <= ln2/2.
inline __m256d exp_pd(__m256d x) {
  const __m256d hi_clip = _mm256_set1_pd(690.0);
  const __m256d lo_clip = _mm256_set1_pd(-690.0);
  x = _mm256_min_pd(hi_clip, _mm256_max_pd(lo_clip, x));

  const __m256d inv_ln2 = _mm256_set1_pd(1.44269504088896340736);
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  const __m256d t = _mm256_fmadd_pd(x, inv_ln2, magic);
  const __m256d n = _mm256_sub_pd(t, magic);
  // t = magic + n exactly, so the integer n is the difference of the raw
  // bit patterns.
  const __m256i n_i64 =
      _mm256_sub_epi64(_mm256_castpd_si256(t), _mm256_castpd_si256(magic));

  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  // Horner evaluation of sum_{k=0..14} r^k / k!
  const double c[15] = {
      1.0,
      1.0,
      1.0 / 2,
      1.0 / 6,
      1.0 / 24,
      1.0 / 120,
      1.0 / 720,
      1.0 / 5040,
      1.0 / 40320,
      1.0 / 362880,
      1.0 / 3628800,
      1.0 / 39916800,
      1.0 / 479001600,
      1.0 / 6227020800.0,
      1.0 / 87178291200.0,
  };
  __m256d p = _mm256_set1_pd(c[14]);
  for (int k = 13; k >= 0; --k)
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[k]));

  const __m256i biased = _mm256_add_epi64(n_i64, _mm256_set1_epi64x(1023));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(biased, 52));
  return _mm256_mul_pd(p, scale);
}

// log1p(u) for u in [0, 1]: atanh series in s = u / (2 + u), s <= 1/3.
inline __m256d log1p_unit_pd(__m256d u) {
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d s = _mm256_div_pd(u, _mm256_add_pd(two, u));
  const __m256d s2 = _mm256_mul_pd(s, s);
  __m256d p = _mm256_set1_pd(1.0 / 33.0);
  for (int k = 15; k >= 0; --k)
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / (2 * k + 1)));
  return _mm256_mul_pd(_mm256_mul_pd(two, s), p);
}

void v_axpby(double a, const double* x, double b, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xi = _mm256_loadu_pd(x + i);
    __m256d yi = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, xi, _mm256_mul_pd(vb, yi)));
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void v_axpbyz(double a, const double* x, double b, const double* y, double* z,
              std::size_t n) {
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xi = _mm256_loadu_pd(x + i);
    __m256d yi = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(z + i, _mm256_fmadd_pd(va, xi, _mm256_mul_pd(vb, yi)));
  }
  for (; i < n; ++i) z[i] = a * x[i] + b * y[i];
}

void v_add_scaled(double* y, double a, const double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xi = _mm256_loadu_pd(x + i);
    __m256d yi = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, xi, yi));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void v_scale(double* y, double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] *= a;
}

double v_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                           _mm256_loadu_pd(y + i + 4), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double v_sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double v_sq_norm(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d a = _mm256_loadu_pd(x + i);
    __m256d b = _mm256_loadu_pd(x + i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void v_min_max(const double* x, std::size_t n, double* mn, double* mx) {
  double lo = x[0], hi = x[0];
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vlo = _mm256_loadu_pd(x);
    __m256d vhi = vlo;
    for (i = 4; i + 4 <= n; i += 4) {
      __m256d v = _mm256_loadu_pd(x + i);
      vlo = _mm256_min_pd(vlo, v);
      vhi = _mm256_max_pd(vhi, v);
    }
    alignas(32) double tmp[4];
    _mm256_store_pd(tmp, vlo);
    lo = std::min(std::min(tmp[0], tmp[1]), std::min(tmp[2], tmp[3]));
    _mm256_store_pd(tmp, vhi);
    hi = std::max(std::max(tmp[0], tmp[1]), std::max(tmp[2], tmp[3]));
  }
  for (; i < n; ++i) {
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
  }
  *mn = lo;
  *mx = hi;
}

void v_exp(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, exp_pd(_mm256_loadu_pd(x + i)));
  if (i < n) {
    alignas(32) double buf[4] = {0, 0, 0, 0};
    for (std::size_t k = i; k < n; ++k) buf[k - i] = x[k];
    alignas(32) double out[4];
    _mm256_store_pd(out, exp_pd(_mm256_load_pd(buf)));
    for (std::size_t k = i; k < n; ++k) y[k] = out[k - i];
  }
}

inline __m256d softplus_pd(__m256d v) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d neg_abs = _mm256_min_pd(v, _mm256_sub_pd(zero, v));
  const __m256d u = exp_pd(neg_abs);
  const __m256d l = log1p_unit_pd(u);
  return _mm256_add_pd(_mm256_max_pd(v, zero), l);
}

void v_softplus(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, softplus_pd(_mm256_loadu_pd(x + i)));
  if (i < n) {
    alignas(32) double buf[4] = {0, 0, 0, 0};
    for (std::size_t k = i; k < n; ++k) buf[k - i] = x[k];
    alignas(32) double out[4];
    _mm256_store_pd(out, softplus_pd(_mm256_load_pd(buf)));
    for (std::size_t k = i; k < n; ++k) y[k] = out[k - i];
  }
}

inline __m256d logistic_pd(__m256d v) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d neg_abs = _mm256_min_pd(v, _mm256_sub_pd(zero, v));
  const __m256d u = exp_pd(neg_abs);
  const __m256d denom = _mm256_add_pd(one, u);
  const __m256d pos = _mm256_div_pd(one, denom);  // x >= 0
  const __m256d neg = _mm256_div_pd(u, denom);    // x < 0
  const __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GE_OQ);
  return _mm256_blendv_pd(neg, pos, mask);
}

void v_logistic(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, logistic_pd(_mm256_loadu_pd(x + i)));
  if (i < n) {
    alignas(32) double buf[4] = {0, 0, 0, 0};
    for (std::size_t k = i; k < n; ++k) buf[k - i] = x[k];
    alignas(32) double out[4];
    _mm256_store_pd(out, logistic_pd(_mm256_load_pd(buf)));
    for (std::size_t k = i; k < n; ++k) y[k] = out[k - i];
  }
}

void v_adam_step(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2) {
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vc1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d vc2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d r1 = _mm256_set1_pd(1.0 / bc1);
  const __m256d r2 = _mm256_set1_pd(1.0 / bc2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gi = _mm256_loadu_pd(g + i);
    __m256d mi = _mm256_fmadd_pd(vb1, _mm256_loadu_pd(m + i),
                                 _mm256_mul_pd(vc1, gi));
    __m256d vi = _mm256_fmadd_pd(vb2, _mm256_loadu_pd(v + i),
                                 _mm256_mul_pd(vc2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    __m256d mh = _mm256_mul_pd(mi, r1);
    __m256d vh = _mm256_mul_pd(vi, r2);
    __m256d den = _mm256_add_pd(_mm256_sqrt_pd(vh), veps);
    __m256d upd = _mm256_div_pd(_mm256_mul_pd(vlr, mh), den);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double mh = m[i] / bc1;
    const double vh = v[i] / bc2;
    p[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

}  // namespace

const Ops avx2_ops = {
    "avx2",     v_axpby, v_axpbyz, v_add_scaled, v_scale,    v_dot,
    v_sum,      v_sq_norm, v_min_max, v_exp,     v_softplus, v_logistic,
    v_adam_step,
};

}  // namespace sdslab::kernels
