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

#include "geoact/geojson.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "geoact/features.hpp"

namespace geoact {

namespace {

using json = nlohmann::json;

struct CellTally {
  std::array<uint32_t, kNumActivities> pred{};
  std::array<uint32_t, kNumActivities> truth{};
  uint32_t total = 0;
};

int modal(const std::array<uint32_t, kNumActivities>& counts) {
  int best = 0;
  for (int c = 1; c < kNumActivities; ++c)
    if (counts[static_cast<size_t>(c)] > counts[static_cast<size_t>(best)])
      best = c;
  return best;
}

json cell_feature(const CellId& cell,
                  const std::array<uint32_t, kNumActivities>& counts,
                  uint32_t total) {
  CellBox box = decode(cell);
  // closed counterclockwise exterior ring, [lon, lat] order
  json ring = json::array({
      json::array({box.lon_min, box.lat_min}),
      json::array({box.lon_max, box.lat_min}),
      json::array({box.lon_max, box.lat_max}),
      json::array({box.lon_min, box.lat_max}),
      json::array({box.lon_min, box.lat_min}),
  });
  json geometry;
  geometry["type"] = "Polygon";
  geometry["coordinates"] = json::array({ring});
  json props;
  props["cell"] = cell.str();
  props["modal_activity"] =
      activity_names()[static_cast<size_t>(modal(counts))];
  props["records"] = total;
  json per;
  for (int c = 0; c < kNumActivities; ++c)
    per[activity_names()[static_cast<size_t>(c)]] =
        counts[static_cast<size_t>(c)];
  props["activity_counts"] = per;
  json feature;
  feature["type"] = "Feature";
  feature["geometry"] = geometry;
  feature["properties"] = props;
  return feature;
}

void write_collection(const std::string& path, json features,
                      uint64_t config_hash, double agreement) {
  json fc;
  fc["type"] = "FeatureCollection";
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash));
  fc["properties"] = {{"config_hash", buf},
                      {"modal_agreement_rate", agreement}};
  fc["features"] = std::move(features);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write geojson: " + path);
  out << fc.dump(1) << "\n";
  if (!out) throw IoError("failed writing geojson: " + path);
}

}  // namespace

MapExportResult export_geojson(const Dataset& d,
                               std::span<const uint32_t> record_ids,
                               std::span<const int8_t> predictions,
                               GridFamily family, int resolution,
                               const std::string& inferred_path,
                               const std::string& truth_path,
                               uint64_t config_hash) {
  if (record_ids.size() != predictions.size())
    throw ContractError("export_geojson: ids/predictions length mismatch");
  if (record_ids.empty())
    throw InvalidInputError("export_geojson: nothing to export");

  std::map<std::string, CellTally> cells;  // ordered: deterministic output
  for (size_t i = 0; i < record_ids.size(); ++i) {
    const CheckIn& r = d.records[record_ids[i]];
    std::string code = record_cell_code(d, r, family, resolution);
    CellTally& t = cells[code];
    ++t.pred[static_cast<size_t>(predictions[i])];
    ++t.truth[static_cast<size_t>(r.activity)];
    ++t.total;
  }

  size_t agree = 0;
  for (const auto& [code, tally] : cells)
    if (modal(tally.pred) == modal(tally.truth)) ++agree;

  MapExportResult result;
  result.cells = cells.size();
  result.records = record_ids.size();
  result.modal_agreement_rate =
      static_cast<double>(agree) / static_cast<double>(cells.size());

  json inferred = json::array();
  json truth = json::array();
  for (const auto& [code, tally] : cells) {
    CellId cell{family, resolution, code};
    inferred.push_back(cell_feature(cell, tally.pred, tally.total));
    truth.push_back(cell_feature(cell, tally.truth, tally.total));
  }
  write_collection(inferred_path, std::move(inferred), config_hash,
                   result.modal_agreement_rate);
  write_collection(truth_path, std::move(truth), config_hash,
                   result.modal_agreement_rate);
  return result;
}

}  // namespace geoact
