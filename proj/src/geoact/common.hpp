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

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace geoact {

// Error taxonomy. The CLI maps these to exit codes; library code throws.
class InvalidInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when more than the tolerated fraction of input lines is malformed,
// or when required ingest inputs are missing/empty.
class IngestQualityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal consistency violations (dimension mismatches, fingerprint
// mismatches, simplex violations).
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 64-bit FNV-1a; used for config/feature fingerprints embedded in output
// files.
uint64_t fnv1a64(std::string_view bytes);

// splitmix64 step; used to derive independent RNG streams from (seed, tag)
// pairs so that parallel work and per-parameter draws stay reproducible.
uint64_t splitmix64(uint64_t x);
uint64_t mix_seed(uint64_t seed, uint64_t tag);
uint64_t mix_seed(uint64_t seed, uint64_t tag_a, uint64_t tag_b);

// Worker-thread cap shared by all modules. Defaults to GEOACT_THREADS if set,
// otherwise the hardware concurrency. The CLI overrides via --threads.
int max_threads();
void set_max_threads(int n);

// Runs chunk_fn(begin, end) over [0, n) partitioned into fixed contiguous
// chunks, one per worker. Chunking depends only on (n, workers), never on
// scheduling, so any per-chunk output written to preallocated slots is
// deterministic.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& chunk_fn);

std::string read_text_file(const std::string& path);

}  // namespace geoact
