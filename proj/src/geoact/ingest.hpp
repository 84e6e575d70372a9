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
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "geoact/grid.hpp"

namespace geoact {

// The nine parent activities, in the fixed (alphabetical) class-index order
// used for all tie-breaks and report columns.
inline constexpr int kNumActivities = 9;
const std::array<std::string, kNumActivities>& activity_names();
int activity_index(std::string_view name);  // -1 if unknown

struct RawCheckIn {
  std::string user_id;
  std::string venue_id;
  std::string venue_category;
  double lat = 0.0;
  double lon = 0.0;
  int64_t utc_epoch = 0;
  int32_t tz_offset_minutes = 0;
};

struct CityConfig {
  std::string name;
  GeoPoint center;
  double assignment_radius_km = 35.0;
};

// City config file: one "name <tab> lat <tab> lon <tab> radius_km" per line,
// '#' comments allowed.
std::vector<CityConfig> load_city_configs(const std::string& path);

class TaxonomyError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

// Raw venue category -> one of the nine parent activities.
struct ActivityTaxonomy {
  enum class UnknownPolicy { Drop, Error };

  std::unordered_map<std::string, int8_t> mapping;  // raw -> activity index
  UnknownPolicy policy = UnknownPolicy::Drop;

  // Two-column TSV: raw_category <tab> parent_activity. '#' comments allowed.
  static ActivityTaxonomy load(const std::string& path,
                               UnknownPolicy policy = UnknownPolicy::Drop);

  // Activity index, or nullopt under the Drop policy for unknown categories.
  // Throws TaxonomyError under the Error policy.
  std::optional<int8_t> map_category(const std::string& raw) const;
};

// Anonymized record: the raw coordinate is replaced by a grid cell and never
// stored. user/venue are indices into the owning Dataset's interned token
// tables.
struct CheckIn {
  uint32_t user = 0;
  uint32_t venue = 0;
  std::string cell_code;  // code at (Dataset.anon_family, anon_resolution)
  int64_t local_epoch = 0;
  int8_t activity = -1;
};

struct DatasetSummary {
  uint64_t checkins = 0;
  uint64_t venues = 0;
  uint64_t users = 0;
};

struct Dataset {
  std::string city;
  GridFamily anon_family = GridFamily::Geohash;
  int anon_resolution = 10;
  std::vector<std::string> users;
  std::vector<std::string> venues;
  std::vector<CheckIn> records;

  // Split state; empty until split_dataset runs.
  std::vector<uint8_t> is_test;
  double test_fraction = 0.0;
  uint64_t split_seed = 0;

  DatasetSummary summary;

  CellId cell_of(const CheckIn& r) const;
  DatasetSummary recount() const;
};

struct ParseStats {
  uint64_t total_lines = 0;  // non-blank lines seen
  uint64_t parsed = 0;
  uint64_t malformed = 0;
};

// fsq-tsv: tab-separated UTF-8, one record per line, columns
//   user_id, venue_id, category_id, category_name, lat, lon,
//   tz_offset_minutes, utc_time
// utc_time accepts ISO 8601 ("2012-04-03T18:00:09Z") or the Foursquare dump
// form ("Tue Apr 03 18:00:09 +0000 2012"). Malformed lines are counted, not
// fatal, up to 1% of the input.
std::vector<RawCheckIn> parse_checkins(std::istream& in,
                                       ParseStats* stats = nullptr);

// Nearest configured center by haversine distance, if within that city's
// assignment radius. Exact distance ties resolve to config order.
std::optional<size_t> assign_city(const RawCheckIn& r,
                                  const std::vector<CityConfig>& cities);

struct AnonymizationConfig {
  int resolution = 10;  // geohash precision of the stored cell
};

struct IngestReport {
  uint64_t input_records = 0;
  uint64_t outside_cities = 0;
  uint64_t unknown_category = 0;
  std::vector<std::string> warnings;
};

// Filters to configured cities, maps categories, anonymizes locations and
// computes per-city summaries. One Dataset per city, config order.
std::vector<Dataset> build_dataset(const std::vector<RawCheckIn>& raw,
                                   const std::vector<CityConfig>& cities,
                                   const ActivityTaxonomy& taxonomy,
                                   const AnonymizationConfig& anon,
                                   IngestReport* report = nullptr);

struct SplitReport {
  uint64_t test_count = 0;
  std::vector<int> unsplittable_classes;  // classes with < 2 records
};

// Stratified by activity with largest-remainder apportionment against
// round(test_fraction * n); per-class share stays within one record of
// test_fraction * class_size. Deterministic given seed.
SplitReport split_dataset(Dataset& d, double test_fraction, uint64_t seed);

int64_t parse_timestamp(std::string_view text);  // throws ParseError

}  // namespace geoact
