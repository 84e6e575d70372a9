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

#include <cmath>
#include <cstring>

#include "geoact/kernels/kernels.hpp"

namespace geoact::kernels {
namespace {

void gemm_nn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t p = 0; p < k; ++p) {
      double av = arow[p];
      const double* brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = acc;
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c,
             size_t m, size_t k, size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (size_t i = 0; i < m; ++i) {
      double av = arow[i];
      double* crow = c + i * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void l2sq(const float* q, const float* rows, size_t n_rows, size_t dim,
          float* out) {
  for (size_t r = 0; r < n_rows; ++r) {
    const float* row = rows + r * dim;
    float acc = 0.0f;
    for (size_t d = 0; d < dim; ++d) {
      float diff = q[d] - row[d];
      acc += diff * diff;
    }
    out[r] = acc;
  }
}

void l1(const float* q, const float* rows, size_t n_rows, size_t dim,
        float* out) {
  for (size_t r = 0; r < n_rows; ++r) {
    const float* row = rows + r * dim;
    float acc = 0.0f;
    for (size_t d = 0; d < dim; ++d) acc += std::fabs(q[d] - row[d]);
    out[r] = acc;
  }
}

const Ops kScalarOps = {"scalar", gemm_nn, gemm_nt, gemm_tn, l2sq, l1};

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

}  // namespace geoact::kernels
