/*
 * Copyright 2026 The geoact authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "geoact/kernels/kernels.hpp"

#if defined(GEOACT_BUILD_AVX2) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace geoact::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

void gemm_nn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t p = 0; p < k; ++p) {
      __m256d av = _mm256_set1_pd(arow[p]);
      const double* brow = b + p * n;
      size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        cv = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j), cv);
        _mm256_storeu_pd(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += arow[p] * brow[j];
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n) {
  size_t k4 = k & ~size_t(3);
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    size_t j = 0;
    // four B rows share each A load
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + (j + 0) * k;
      const double* b1 = b + (j + 1) * k;
      const double* b2 = b + (j + 2) * k;
      const double* b3 = b + (j + 3) * k;
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      __m256d acc2 = _mm256_setzero_pd();
      __m256d acc3 = _mm256_setzero_pd();
      size_t p = 0;
      for (; p < k4; p += 4) {
        __m256d av = _mm256_loadu_pd(arow + p);
        acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), acc0);
        acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), acc1);
        acc2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), acc2);
        acc3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), acc3);
      }
      double s0 = hsum(acc0), s1 = hsum(acc1), s2 = hsum(acc2), s3 = hsum(acc3);
      for (; p < k; ++p) {
        double av = arow[p];
        s0 += av * b0[p];
        s1 += av * b1[p];
        s2 += av * b2[p];
        s3 += av * b3[p];
      }
      crow[j + 0] = s0;
      crow[j + 1] = s1;
      crow[j + 2] = s2;
      crow[j + 3] = s3;
    }
    for (; j < n; ++j) {
      const double* brow = b + j * k;
      __m256d acc = _mm256_setzero_pd();
      size_t p = 0;
      for (; p < k4; p += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p),
                              _mm256_loadu_pd(brow + p), acc);
      double s = hsum(acc);
      for (; p < k; ++p) s += arow[p] * brow[p];
      crow[j] = s;
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  size_t n4 = n & ~size_t(3);
  for (size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (size_t i = 0; i < m; ++i) {
      __m256d av = _mm256_set1_pd(arow[i]);
      double* crow = c + i * n;
      size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        cv = _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j), cv);
        _mm256_storeu_pd(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += arow[i] * brow[j];
    }
  }
}

void l2sq(const float* q, const float* rows, size_t n_rows, size_t dim,
          float* out) {
  size_t d8 = dim & ~size_t(7);
  for (size_t r = 0; r < n_rows; ++r) {
    const float* row = rows + r * dim;
    __m256 acc = _mm256_setzero_ps();
    size_t d = 0;
    for (; d < d8; d += 8) {
      __m256 diff = _mm256_sub_ps(_mm256_loadu_ps(q + d),
                                  _mm256_loadu_ps(row + d));
      acc = _mm256_fmadd_ps(diff, diff, acc);
    }
    float s = hsum(acc);
    for (; d < dim; ++d) {
      float diff = q[d] - row[d];
      s += diff * diff;
    }
    out[r] = s;
  }
}

void l1(const float* q, const float* rows, size_t n_rows, size_t dim,
        float* out) {
  const __m256 abs_mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  size_t d8 = dim & ~size_t(7);
  for (size_t r = 0; r < n_rows; ++r) {
    const float* row = rows + r * dim;
    __m256 acc = _mm256_setzero_ps();
    size_t d = 0;
    for (; d < d8; d += 8) {
      __m256 diff = _mm256_sub_ps(_mm256_loadu_ps(q + d),
                                  _mm256_loadu_ps(row + d));
      acc = _mm256_add_ps(acc, _mm256_and_ps(diff, abs_mask));
    }
    float s = hsum(acc);
    for (; d < dim; ++d) s += std::fabs(q[d] - row[d]);
    out[r] = s;
  }
}

const Ops kAvx2Ops = {"avx2", gemm_nn, gemm_nt, gemm_tn, l2sq, l1};

}  // namespace

const Ops* avx2_ops_compiled() { return &kAvx2Ops; }

}  // namespace geoact::kernels

#else

namespace geoact::kernels {
const Ops* avx2_ops_compiled() { return nullptr; }
}  // namespace geoact::kernels

#endif
