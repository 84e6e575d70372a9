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

#pragma once

#include <cstddef>

namespace geoact::kernels {

// Dense inner-loop kernels behind the distance scans (k-NN) and the batched
// matrix products (MLP training). Each kernel has a scalar reference
// implementation and an AVX2 variant; the active table is picked once at
// startup by CPU probe and can be forced with GEOACT_KERNELS=scalar|avx2.
//
// All matrices are row-major.
//   gemm_nn: C[M,N] = A[M,K] * B[K,N]
//   gemm_nt: C[M,N] = A[M,K] * B[N,K]^T   (row dot products)
//   gemm_tn: C[M,N] = A[K,M]^T * B[K,N]
//   l2sq:    out[r] = sum_d (q[d] - rows[r*dim+d])^2
//   l1:      out[r] = sum_d |q[d] - rows[r*dim+d]|
struct Ops {
  const char* name;
  void (*gemm_nn_f64)(const double* a, const double* b, double* c,
                      size_t m, size_t k, size_t n);
  void (*gemm_nt_f64)(const double* a, const double* b, double* c,
                      size_t m, size_t k, size_t n);
  void (*gemm_tn_f64)(const double* a, const double* b, double* c,
                      size_t m, size_t k, size_t n);
  void (*l2sq_f32)(const float* q, const float* rows, size_t n_rows,
                   size_t dim, float* out);
  void (*l1_f32)(const float* q, const float* rows, size_t n_rows,
                 size_t dim, float* out);
};

// Active table (dispatched once, stable for the process lifetime).
const Ops& ops();

// Reference table, always available.
const Ops& scalar_ops();

// AVX2 table, or nullptr when the binary or the CPU lacks AVX2+FMA.
const Ops* avx2_ops();

}  // namespace geoact::kernels
