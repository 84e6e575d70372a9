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
#include <string>
#include <unordered_map>
#include <vector>

#include "geoact/ingest.hpp"

namespace geoact {

struct CellStats {
  int32_t poi_count = 0;
  int32_t user_count = 0;
  int32_t checkin_count = 0;
};

// Per-cell counts at one (family, resolution), computed from the training
// split only. Cells never seen in training have no entry.
struct GridStats {
  GridFamily family = GridFamily::Geohash;
  int resolution = 0;
  std::unordered_map<std::string, CellStats> cells;
};

// Which feature groups go into the vector. Dimensionality is a pure function
// of this struct; assembled vectors always match dimension().
struct FeatureSpec {
  ResolutionLadder ladder = ResolutionLadder::default_ladder();
  bool include_user = true;
  bool include_time = true;
  bool include_distance = true;
  bool include_bearing = true;
  bool stat_poi = true;
  bool stat_user = true;
  bool stat_checkin = true;

  size_t dimension() const;
  std::vector<std::string> column_names() const;
  uint64_t fingerprint() const;
  int stats_per_pair() const;  // enabled statistics + seen flag, or 0
};

// Everything derived from the training split that feature assembly needs:
// grid statistics, dense cell ordinals, and per-user activity history.
struct TrainContext {
  struct UserStats {
    int32_t checkin_count = 0;
    int8_t modal_activity = -1;  // ties -> lowest class index
  };

  std::vector<GridStats> stats;  // ladder pair order
  std::vector<std::unordered_map<std::string, int32_t>> ordinals;  // per pair
  std::vector<UserStats> users;  // indexed like Dataset.users
  uint64_t train_count = 0;
};

// Cell code of a record at (family, resolution), derived from the record's
// anonymized cell: prefix truncation within Geohash, re-encoding of the cell
// center for OffsetGeohash. Resolutions finer than the anonymization grid are
// rejected.
std::string record_cell_code(const Dataset& d, const CheckIn& r,
                             GridFamily family, int resolution);

GridStats compute_grid_stats(const Dataset& d,
                             const std::vector<uint32_t>& train_rows,
                             GridFamily family, int resolution);

TrainContext build_train_context(const Dataset& d, const FeatureSpec& spec);

// Relative location of a cell with respect to the city center: great-circle
// distance in km and initial bearing in degrees from the cell center toward
// the center. Coincident points resolve to (0, 0).
std::pair<double, double> relative_location(const CellId& cell,
                                            const GeoPoint& city_center);

// [sin hour, cos hour, sin dow, cos dow, weekend], local-time phenomena.
std::array<double, 5> encode_timestamp(int64_t local_epoch);

// (log1p training check-in count, modal training activity index); unseen
// users get (0, -1).
std::array<double, 2> encode_user(uint32_t user, const TrainContext& ctx);

enum class SplitFilter { All, TrainOnly, TestOnly };

struct FeatureMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<float> values;  // row-major
  std::vector<int8_t> labels;
  std::vector<uint32_t> record_ids;  // indices into the source Dataset
  std::vector<std::string> column_names;
  uint64_t spec_fingerprint = 0;

  const float* row(size_t i) const { return values.data() + i * cols; }
};

FeatureMatrix assemble_features(const Dataset& d, SplitFilter filter,
                                const FeatureSpec& spec,
                                const TrainContext& ctx,
                                const CityConfig& city);

void write_feature_csv(const FeatureMatrix& m, const std::string& path);

}  // namespace geoact
