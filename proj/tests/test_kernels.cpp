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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "geoact/kernels/kernels.hpp"

using namespace geoact::kernels;

namespace {

std::vector<double> rand_f64(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<float> rand_f32(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// straight-line reference, independent of the kernel implementations
void naive_nn(const double* a, const double* b, double* c, size_t m, size_t k,
              size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      double acc = 0;
      for (size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

void check_gemm(const Ops& ops, size_t m, size_t k, size_t n, uint64_t seed) {
  auto a = rand_f64(m * k, seed);
  auto b = rand_f64(k * n, seed + 1);
  std::vector<double> want(m * n), got(m * n);
  naive_nn(a.data(), b.data(), want.data(), m, k, n);
  ops.gemm_nn_f64(a.data(), b.data(), got.data(), m, k, n);
  for (size_t i = 0; i < m * n; ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));

  // nt: B stored as [n x k] rows
  std::vector<double> bt(n * k);
  for (size_t p = 0; p < k; ++p)
    for (size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
  ops.gemm_nt_f64(a.data(), bt.data(), got.data(), m, k, n);
  for (size_t i = 0; i < m * n; ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));

  // tn: A stored as [k x m]
  std::vector<double> at(k * m);
  for (size_t i = 0; i < m; ++i)
    for (size_t p = 0; p < k; ++p) at[p * m + i] = a[i * k + p];
  ops.gemm_tn_f64(at.data(), b.data(), got.data(), m, k, n);
  for (size_t i = 0; i < m * n; ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
}

void check_distances(const Ops& ops, size_t rows, size_t dim, uint64_t seed) {
  auto q = rand_f32(dim, seed);
  auto mat = rand_f32(rows * dim, seed + 1);
  std::vector<float> l2(rows), l1(rows);
  ops.l2sq_f32(q.data(), mat.data(), rows, dim, l2.data());
  ops.l1_f32(q.data(), mat.data(), rows, dim, l1.data());
  for (size_t r = 0; r < rows; ++r) {
    double w2 = 0, w1 = 0;
    for (size_t d = 0; d < dim; ++d) {
      double diff = double(q[d]) - double(mat[r * dim + d]);
      w2 += diff * diff;
      w1 += std::fabs(diff);
    }
    CHECK(double(l2[r]) == doctest::Approx(w2).epsilon(2e-4));
    CHECK(double(l1[r]) == doctest::Approx(w1).epsilon(2e-4));
  }
}

}  // namespace

TEST_CASE("scalar kernels match the naive reference") {
  for (auto [m, k, n] : {std::array<size_t, 3>{1, 1, 1},
                         {3, 5, 7},
                         {8, 16, 4},
                         {13, 33, 9},
                         {2, 128, 130}}) {
    check_gemm(scalar_ops(), m, k, n, 100 + m);
  }
  check_distances(scalar_ops(), 1, 1, 7);
  check_distances(scalar_ops(), 17, 13, 8);
  check_distances(scalar_ops(), 64, 79, 9);
}

TEST_CASE("avx2 kernels agree with scalar") {
  const Ops* avx2 = avx2_ops();
  if (avx2 == nullptr) {
    MESSAGE("AVX2 unavailable on this host; dispatch falls back to scalar");
    CHECK(std::string(ops().name) == "scalar");
    return;
  }
  for (auto [m, k, n] : {std::array<size_t, 3>{1, 1, 1},
                         {3, 5, 7},
                         {8, 16, 4},
                         {13, 33, 9},
                         {5, 127, 129},
                         {2, 512, 96}}) {
    check_gemm(*avx2, m, k, n, 200 + n);
  }
  check_distances(*avx2, 1, 1, 17);
  check_distances(*avx2, 17, 13, 18);
  check_distances(*avx2, 100, 79, 19);
  check_distances(*avx2, 33, 8, 20);

  // scalar and avx2 must agree on identical inputs
  std::mt19937_64 rng(21);
  size_t m = 11, k = 83, n = 10;
  auto a = rand_f64(m * k, 300);
  auto b = rand_f64(n * k, 301);
  std::vector<double> c_scalar(m * n), c_avx2(m * n);
  scalar_ops().gemm_nt_f64(a.data(), b.data(), c_scalar.data(), m, k, n);
  avx2->gemm_nt_f64(a.data(), b.data(), c_avx2.data(), m, k, n);
  for (size_t i = 0; i < m * n; ++i)
    CHECK(c_avx2[i] == doctest::Approx(c_scalar[i]).epsilon(1e-12));
}

TEST_CASE("dispatch honors GEOACT_KERNELS override") {
  // the active table was chosen at startup; both tables remain callable
  CHECK(ops().gemm_nn_f64 != nullptr);
  CHECK(scalar_ops().gemm_nn_f64 != nullptr);
  CHECK(std::string(scalar_ops().name) == "scalar");
}
