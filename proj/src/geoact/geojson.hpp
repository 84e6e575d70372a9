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

#include <span>
#include <string>

#include "geoact/ingest.hpp"

namespace geoact {

struct MapExportResult {
  size_t cells = 0;
  size_t records = 0;
  // Fraction of cells whose modal inferred activity matches the modal
  // ground-truth activity.
  double modal_agreement_rate = 0.0;
};

// Writes two GeoJSON FeatureCollections (inferred and ground truth): one
// polygon per grid cell at the requested resolution, carrying the modal
// activity and per-activity counts. Rings are closed and counterclockwise,
// coordinates are [lon, lat].
MapExportResult export_geojson(const Dataset& d,
                               std::span<const uint32_t> record_ids,
                               std::span<const int8_t> predictions,
                               GridFamily family, int resolution,
                               const std::string& inferred_path,
                               const std::string& truth_path,
                               uint64_t config_hash);

}  // namespace geoact
