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

#include <cstdlib>
#include <cstring>

#include "geoact/kernels/kernels.hpp"

namespace geoact::kernels {

// Defined in kernels_avx2.cpp; nullptr when that TU was built without AVX2.
const Ops* avx2_ops_compiled();

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* pick() {
  const Ops* avx2 = avx2_ops_compiled();
  if (avx2 != nullptr && !cpu_has_avx2_fma()) avx2 = nullptr;
  if (const char* env = std::getenv("GEOACT_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (std::strcmp(env, "avx2") == 0 && avx2 != nullptr) return avx2;
  }
  return avx2 != nullptr ? avx2 : &scalar_ops();
}

}  // namespace

const Ops* avx2_ops() {
  const Ops* compiled = avx2_ops_compiled();
  return (compiled != nullptr && cpu_has_avx2_fma()) ? compiled : nullptr;
}

const Ops& ops() {
  static const Ops* active = pick();
  return *active;
}

}  // namespace geoact::kernels
