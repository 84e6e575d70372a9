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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "geoact/geodesy.hpp"

namespace geoact {

// Two native grid families plus an adapter slot for an external hexagonal
// provider. OffsetGeohash is Geohash evaluated on the point translated by
// half a cell in both axes at the target resolution, which yields cell
// boundaries independent of plain Geohash at every resolution.
enum class GridFamily : uint8_t { Geohash, OffsetGeohash, ExternalHex };

std::string_view family_token(GridFamily f);           // "gh" / "og" / "hex"
GridFamily family_from_token(std::string_view token);  // throws ParseError

inline constexpr int kGeohashMinResolution = 1;
inline constexpr int kGeohashMaxResolution = 12;

struct CellId {
  GridFamily family = GridFamily::Geohash;
  int resolution = 0;
  std::string code;

  bool operator==(const CellId&) const = default;

  // Canonical serialized form "family:resolution:code", e.g. "gh:7:u4pruyd".
  std::string str() const;
  static CellId parse(std::string_view s);
};

struct CellBox {
  double lat_min = 0, lat_max = 0, lon_min = 0, lon_max = 0;

  GeoPoint center() const;
  bool contains(const GeoPoint& p) const;
};

// Geodetic width/height (degrees) of one cell at a Geohash resolution.
double geohash_cell_width_deg(int resolution);
double geohash_cell_height_deg(int resolution);

CellId encode(const GeoPoint& p, GridFamily family, int resolution);
CellBox decode(const CellId& cell);

// Prefix-truncation parent. For the geohash families the parent box contains
// the child box exactly only for plain Geohash; the offset family has
// H3-style approximate containment (parents shift by their own half cell).
CellId parent(const CellId& cell);

// Resolutions to extract per family, family order preserved.
struct ResolutionLadder {
  struct Entry {
    GridFamily family;
    std::vector<int> resolutions;  // strictly increasing
  };
  std::vector<Entry> entries;

  // Geohash + OffsetGeohash at precisions 4..10.
  static ResolutionLadder default_ladder();
  static ResolutionLadder single(GridFamily f, std::vector<int> resolutions);

  void validate() const;  // throws InvalidInputError
  std::vector<std::pair<GridFamily, int>> pairs() const;
  size_t scale_count() const;  // total (family, resolution) pairs
};

// One CellId per configured (family, resolution) pair, deterministic order.
std::vector<CellId> cells_for_point(const GeoPoint& p,
                                    const ResolutionLadder& ladder);

// Plug-in point for a true hexagonal hierarchical grid (e.g. H3). Encoding
// with GridFamily::ExternalHex routes here; without a registered provider it
// is an error.
class HexGridProvider {
 public:
  virtual ~HexGridProvider() = default;
  virtual std::string encode(const GeoPoint& p, int resolution) = 0;
  virtual CellBox cell_box(const std::string& code, int resolution) = 0;
  virtual std::string parent(const std::string& code, int resolution) = 0;
};

void register_hex_provider(std::shared_ptr<HexGridProvider> provider);
bool has_hex_provider();

}  // namespace geoact
