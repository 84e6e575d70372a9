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

#include <array>
#include <span>
#include <string>
#include <vector>

#include "geoact/ingest.hpp"

namespace geoact {

// Probability floor/ceiling applied inside log_loss.
inline constexpr double kLogLossClip = 1e-15;

// Mean negative log-probability of the true class. probs is row-major
// [n x kNumActivities]; each row must lie on the simplex (tolerance 1e-6).
double log_loss(std::span<const double> probs, std::span<const int8_t> labels);

struct PerClassF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  uint64_t support = 0;
};

struct MacroF1Result {
  double macro_f1 = 0.0;  // unweighted mean over classes present in labels
  std::array<PerClassF1, kNumActivities> per_class{};
};

// 0/0 ratios resolve to 0 (collapsed predictors score poorly, absent classes
// do not contribute).
MacroF1Result macro_f1(std::span<const int8_t> preds,
                       std::span<const int8_t> labels);

struct ConfusionMatrix {
  std::array<std::array<uint64_t, kNumActivities>, kNumActivities> counts{};
  uint64_t total = 0;

  // Row-normalized view; rows with zero support are flagged instead of
  // divided.
  std::array<std::array<double, kNumActivities>, kNumActivities> normalized()
      const;
  std::array<bool, kNumActivities> zero_support_rows() const;
};

ConfusionMatrix confusion(std::span<const int8_t> preds,
                          std::span<const int8_t> labels);

struct MetricsReport {
  std::string model_family;
  std::string split;
  uint64_t n = 0;
  size_t feature_dim = 0;
  double logloss = 0.0;
  MacroF1Result f1;
  uint64_t config_hash = 0;
  uint64_t seed = 0;

  std::string to_json() const;
};

MetricsReport evaluate_predictions(std::span<const double> probs,
                                   std::span<const int8_t> labels);

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path,
                         bool normalized);

int argmax9(const double* probs);  // ties -> lowest class index

}  // namespace geoact
