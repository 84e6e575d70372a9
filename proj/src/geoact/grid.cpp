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

#include "geoact/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <charconv>
#include <mutex>

namespace geoact {

namespace {

constexpr std::string_view kBase32 = "0123456789bcdefghjkmnpqrstuvwxyz";

std::array<int8_t, 256> build_rev() {
  std::array<int8_t, 256> rev;
  rev.fill(-1);
  for (size_t i = 0; i < kBase32.size(); ++i)
    rev[static_cast<unsigned char>(kBase32[i])] = static_cast<int8_t>(i);
  return rev;
}

const std::array<int8_t, 256> kBase32Rev = build_rev();

std::shared_ptr<HexGridProvider> g_hex_provider;
std::mutex g_hex_mutex;

std::shared_ptr<HexGridProvider> hex_provider_or_throw() {
  std::lock_guard<std::mutex> lock(g_hex_mutex);
  if (!g_hex_provider)
    throw InvalidInputError("ExternalHex family used with no registered provider");
  return g_hex_provider;
}

void check_resolution(int resolution) {
  if (resolution < kGeohashMinResolution || resolution > kGeohashMaxResolution)
    throw InvalidInputError("geohash resolution out of range [1, 12]: " +
                            std::to_string(resolution));
}

// Standard interleaved lon/lat bisection. Points exactly on a boundary take
// the upper interval (>= midpoint -> bit 1).
std::string geohash_encode_raw(double lat, double lon, int resolution) {
  double lat_lo = -90.0, lat_hi = 90.0, lon_lo = -180.0, lon_hi = 180.0;
  std::string out;
  out.reserve(static_cast<size_t>(resolution));
  bool even = true;  // longitude bit first
  int ch = 0, bit = 0;
  while (static_cast<int>(out.size()) < resolution) {
    if (even) {
      double mid = (lon_lo + lon_hi) * 0.5;
      if (lon >= mid) {
        ch = ch * 2 + 1;
        lon_lo = mid;
      } else {
        ch = ch * 2;
        lon_hi = mid;
      }
    } else {
      double mid = (lat_lo + lat_hi) * 0.5;
      if (lat >= mid) {
        ch = ch * 2 + 1;
        lat_lo = mid;
      } else {
        ch = ch * 2;
        lat_hi = mid;
      }
    }
    even = !even;
    if (++bit == 5) {
      out.push_back(kBase32[static_cast<size_t>(ch)]);
      bit = 0;
      ch = 0;
    }
  }
  return out;
}

CellBox geohash_decode_raw(std::string_view code) {
  CellBox box{-90.0, 90.0, -180.0, 180.0};
  bool even = true;
  for (char c : code) {
    int v = kBase32Rev[static_cast<unsigned char>(c)];
    if (v < 0)
      throw ParseError(std::string("invalid geohash character '") + c + "'");
    for (int i = 4; i >= 0; --i) {
      int b = (v >> i) & 1;
      if (even) {
        double mid = (box.lon_min + box.lon_max) * 0.5;
        (b ? box.lon_min : box.lon_max) = mid;
      } else {
        double mid = (box.lat_min + box.lat_max) * 0.5;
        (b ? box.lat_min : box.lat_max) = mid;
      }
      even = !even;
    }
  }
  return box;
}

}  // namespace

std::string_view family_token(GridFamily f) {
  switch (f) {
    case GridFamily::Geohash: return "gh";
    case GridFamily::OffsetGeohash: return "og";
    case GridFamily::ExternalHex: return "hex";
  }
  throw InvalidInputError("unknown grid family");
}

GridFamily family_from_token(std::string_view token) {
  if (token == "gh") return GridFamily::Geohash;
  if (token == "og") return GridFamily::OffsetGeohash;
  if (token == "hex") return GridFamily::ExternalHex;
  throw ParseError("unknown grid family token: " + std::string(token));
}

std::string CellId::str() const {
  std::string s(family_token(family));
  s += ':';
  s += std::to_string(resolution);
  s += ':';
  s += code;
  return s;
}

CellId CellId::parse(std::string_view s) {
  size_t c1 = s.find(':');
  size_t c2 = c1 == std::string_view::npos ? c1 : s.find(':', c1 + 1);
  if (c2 == std::string_view::npos)
    throw ParseError("malformed CellId: " + std::string(s));
  CellId cell;
  cell.family = family_from_token(s.substr(0, c1));
  std::string_view res = s.substr(c1 + 1, c2 - c1 - 1);
  int r = 0;
  auto [ptr, ec] = std::from_chars(res.data(), res.data() + res.size(), r);
  if (ec != std::errc{} || ptr != res.data() + res.size())
    throw ParseError("malformed CellId resolution: " + std::string(s));
  cell.resolution = r;
  cell.code = std::string(s.substr(c2 + 1));
  if (cell.family != GridFamily::ExternalHex) {
    check_resolution(cell.resolution);
    if (static_cast<int>(cell.code.size()) != cell.resolution)
      throw ParseError("CellId code length does not match resolution: " +
                       std::string(s));
    for (char c : cell.code)
      if (kBase32Rev[static_cast<unsigned char>(c)] < 0)
        throw ParseError(std::string("invalid geohash character '") + c + "'");
  }
  return cell;
}

GeoPoint CellBox::center() const {
  double lat = std::clamp((lat_min + lat_max) * 0.5, -90.0, 90.0);
  return GeoPoint(lat, normalize_lon((lon_min + lon_max) * 0.5));
}

bool CellBox::contains(const GeoPoint& p) const {
  return p.lat >= lat_min && p.lat < lat_max && p.lon >= lon_min &&
         p.lon < lon_max;
}

double geohash_cell_width_deg(int resolution) {
  check_resolution(resolution);
  int lon_bits = (5 * resolution + 1) / 2;
  return 360.0 / std::exp2(static_cast<double>(lon_bits));
}

double geohash_cell_height_deg(int resolution) {
  check_resolution(resolution);
  int lat_bits = (5 * resolution) / 2;
  return 180.0 / std::exp2(static_cast<double>(lat_bits));
}

CellId encode(const GeoPoint& p, GridFamily family, int resolution) {
  CellId cell;
  cell.family = family;
  cell.resolution = resolution;
  switch (family) {
    case GridFamily::Geohash:
      check_resolution(resolution);
      cell.code = geohash_encode_raw(p.lat, p.lon, resolution);
      break;
    case GridFamily::OffsetGeohash: {
      check_resolution(resolution);
      double lat = p.lat + geohash_cell_height_deg(resolution) * 0.5;
      double lon =
          normalize_lon(p.lon + geohash_cell_width_deg(resolution) * 0.5);
      if (lat > 90.0) lat = 90.0;
      cell.code = geohash_encode_raw(lat, lon, resolution);
      break;
    }
    case GridFamily::ExternalHex:
      cell.code = hex_provider_or_throw()->encode(p, resolution);
      break;
  }
  return cell;
}

CellBox decode(const CellId& cell) {
  switch (cell.family) {
    case GridFamily::Geohash: {
      if (static_cast<int>(cell.code.size()) != cell.resolution)
        throw ParseError("CellId code length does not match resolution");
      return geohash_decode_raw(cell.code);
    }
    case GridFamily::OffsetGeohash: {
      if (static_cast<int>(cell.code.size()) != cell.resolution)
        throw ParseError("CellId code length does not match resolution");
      CellBox box = geohash_decode_raw(cell.code);
      double dh = geohash_cell_height_deg(cell.resolution) * 0.5;
      double dw = geohash_cell_width_deg(cell.resolution) * 0.5;
      box.lat_min -= dh;
      box.lat_max -= dh;
      box.lon_min -= dw;
      box.lon_max -= dw;
      return box;
    }
    case GridFamily::ExternalHex:
      return hex_provider_or_throw()->cell_box(cell.code, cell.resolution);
  }
  throw InvalidInputError("unknown grid family");
}

CellId parent(const CellId& cell) {
  if (cell.resolution <= 1)
    throw InvalidInputError("cell at resolution 1 has no parent");
  CellId up;
  up.family = cell.family;
  up.resolution = cell.resolution - 1;
  if (cell.family == GridFamily::ExternalHex) {
    up.code = hex_provider_or_throw()->parent(cell.code, cell.resolution);
  } else {
    up.code = cell.code.substr(0, cell.code.size() - 1);
  }
  return up;
}

ResolutionLadder ResolutionLadder::default_ladder() {
  std::vector<int> res{4, 5, 6, 7, 8, 9, 10};
  return ResolutionLadder{{{GridFamily::Geohash, res},
                           {GridFamily::OffsetGeohash, res}}};
}

ResolutionLadder ResolutionLadder::single(GridFamily f,
                                          std::vector<int> resolutions) {
  return ResolutionLadder{{{f, std::move(resolutions)}}};
}

void ResolutionLadder::validate() const {
  if (entries.empty()) throw InvalidInputError("ResolutionLadder: empty");
  for (const auto& e : entries) {
    if (e.resolutions.empty())
      throw InvalidInputError("ResolutionLadder: family with no resolutions");
    for (size_t i = 0; i < e.resolutions.size(); ++i) {
      if (e.family != GridFamily::ExternalHex) check_resolution(e.resolutions[i]);
      if (i > 0 && e.resolutions[i] <= e.resolutions[i - 1])
        throw InvalidInputError(
            "ResolutionLadder: resolutions must be strictly increasing");
    }
  }
}

std::vector<std::pair<GridFamily, int>> ResolutionLadder::pairs() const {
  std::vector<std::pair<GridFamily, int>> out;
  for (const auto& e : entries)
    for (int r : e.resolutions) out.emplace_back(e.family, r);
  return out;
}

size_t ResolutionLadder::scale_count() const {
  size_t n = 0;
  for (const auto& e : entries) n += e.resolutions.size();
  return n;
}

std::vector<CellId> cells_for_point(const GeoPoint& p,
                                    const ResolutionLadder& ladder) {
  ladder.validate();
  std::vector<CellId> out;
  out.reserve(ladder.scale_count());
  for (const auto& [family, res] : ladder.pairs())
    out.push_back(encode(p, family, res));
  return out;
}

void register_hex_provider(std::shared_ptr<HexGridProvider> provider) {
  std::lock_guard<std::mutex> lock(g_hex_mutex);
  g_hex_provider = std::move(provider);
}

bool has_hex_provider() {
  std::lock_guard<std::mutex> lock(g_hex_mutex);
  return static_cast<bool>(g_hex_provider);
}

}  // namespace geoact
