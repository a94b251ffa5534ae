// Copyright (c) 2026 the asmo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2/FMA variants of the kernel table. Built only on x86-64; this
// translation unit is compiled with -mavx2 -mfma and must not be entered
// unless avx2_available() said yes.

#include "asmo/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace asmo::kern {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_f64(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

// Gathers the even elements of b: b[2i..2i+7] -> lanes via shuffle of two
// loads. Only indices up to b[2(n-1)] are guaranteed valid, so the vector
// loop stops one group early (it touches b[2i+7]).
double dot_s2_f64(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 5 <= n; i += 4) {
    __m256d b0 = _mm256_loadu_pd(b + 2 * i);      // b0 b1 b2 b3
    __m256d b1 = _mm256_loadu_pd(b + 2 * i + 4);  // b4 b5 b6 b7
    // even lanes of (b0,b1): unpacklo gives (b0,b4,b2,b6) per 128-bit halves;
    // permute fixes the middle pair ordering.
    __m256d even = _mm256_unpacklo_pd(b0, b1);
    even = _mm256_permute4x64_pd(even, _MM_SHUFFLE(3, 1, 2, 0));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), even, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i] * b[2 * i];
  return r;
}

void axpy_f64(double* y, double s, const double* x, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(vs, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += s * x[i];
}

void axpy_s2_f64(double* y, double s, const double* x, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 5 <= n; i += 4) {
    __m256d x0 = _mm256_loadu_pd(x + 2 * i);
    __m256d x1 = _mm256_loadu_pd(x + 2 * i + 4);
    __m256d even = _mm256_unpacklo_pd(x0, x1);
    even = _mm256_permute4x64_pd(even, _MM_SHUFFLE(3, 1, 2, 0));
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(vs, even, vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += s * x[2 * i];
}

void axpy_scatter2_f64(double* y, double s, const double* x, std::size_t n) {
  // Scatter store has no AVX2 form; keep the loop scalar but let the
  // compiler schedule it. The transpose pass is a small share of runtime.
  for (std::size_t i = 0; i < n; ++i) y[2 * i] += s * x[i];
}

double sum_abs_diff_f32(const float* a, const float* b, std::size_t n) {
  const __m256 signmask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    d = _mm256_and_ps(d, signmask);
    acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm256_castps256_ps128(d)));
    acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm256_extractf128_ps(d, 1)));
  }
  double r = hsum(acc);
  for (; i < n; ++i)
    r += std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return r;
}

double sum_abs_diff_f64(const double* a, const double* b, std::size_t n) {
  const __m256d signmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_and_pd(d, signmask));
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += std::fabs(a[i] - b[i]);
  return r;
}

void sgd_update_f64(double* p, double* v, const double* g, std::size_t n,
                    double lr, double momentum, double wd) {
  const __m256d vm = _mm256_set1_pd(momentum);
  const __m256d vwd = _mm256_set1_pd(wd);
  const __m256d vlr = _mm256_set1_pd(lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vp = _mm256_loadu_pd(p + i);
    __m256d vv = _mm256_loadu_pd(v + i);
    vv = _mm256_fmadd_pd(vm, vv, _mm256_fmadd_pd(vwd, vp, _mm256_loadu_pd(g + i)));
    vp = _mm256_fnmadd_pd(vlr, vv, vp);
    _mm256_storeu_pd(v + i, vv);
    _mm256_storeu_pd(p + i, vp);
  }
  for (; i < n; ++i) {
    v[i] = momentum * v[i] + g[i] + wd * p[i];
    p[i] -= lr * v[i];
  }
}

}  // namespace

const Ops& avx2_table() {
  static const Ops table = {
      "avx2",         dot_f64,          dot_s2_f64,       axpy_f64,
      axpy_s2_f64,    axpy_scatter2_f64, sum_abs_diff_f32, sum_abs_diff_f64,
      sgd_update_f64,
  };
  return table;
}

}  // namespace asmo::kern

#endif  // x86-64
