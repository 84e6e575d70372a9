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

#include <optional>

#include "geoact/metrics.hpp"
#include "geoact/models/model.hpp"

namespace geoact {

enum class AblationAxis {
  GridResolution,
  RelativeLocation,
  GridStatistics,
  GridCount,
  ScaleCount,
};

std::string_view ablation_axis_name(AblationAxis axis);
AblationAxis ablation_axis_from_name(std::string_view name);

struct AblationVariant {
  std::string name;
  FeatureSpec spec;
  // GridResolution only: records re-anonymized at this coarser resolution
  std::optional<int> anon_resolution;
};

// Variants differ from the base configuration in exactly the axis under
// study; splits and seeds are shared so differences isolate the axis.
struct AblationPlan {
  AblationAxis axis = AblationAxis::GridResolution;
  FeatureSpec base;
  std::vector<AblationVariant> variants;

  static AblationPlan make(AblationAxis axis, const FeatureSpec& base);
};

struct AblationRow {
  std::string variant;
  bool failed = false;
  std::string error;
  size_t feature_dim = 0;
  MetricsReport report;
};

// Returns a copy of d with cells truncated to the coarser resolution.
Dataset coarsen_dataset(const Dataset& d, int resolution);

// Trains the fixed model spec once per variant on the training split and
// evaluates on the test split. A variant that fails to build is reported as
// failed and the run continues.
std::vector<AblationRow> run_ablation(const AblationPlan& plan,
                                      const Dataset& d, const CityConfig& city,
                                      const ModelSpec& model_spec,
                                      uint64_t seed, uint64_t config_hash);

void write_ablation_csv(const std::vector<AblationRow>& rows,
                        AblationAxis axis, const std::string& path);

}  // namespace geoact
