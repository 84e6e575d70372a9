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

#include "geoact/common.hpp"

namespace geoact {

// Spherical-earth radius used everywhere unless a config overrides it. Echoed
// into every report header for reproducibility.
inline constexpr double kDefaultEarthRadiusKm = 6371.0;

struct EarthModel {
  double radius_km = kDefaultEarthRadiusKm;
};

// Latitude/longitude in degrees. Construction validates latitude and
// normalizes longitude into [-180, 180).
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  GeoPoint() = default;
  GeoPoint(double lat_deg, double lon_deg);

  bool operator==(const GeoPoint&) const = default;
};

double normalize_lon(double lon_deg);

// Raised by initial_bearing_deg when the two points coincide; callers that
// need a total function substitute 0 degrees.
class DegenerateBearingError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

// Great-circle distance in km via the haversine formulation. Symmetric in its
// arguments and exactly zero for identical points.
double haversine_km(const GeoPoint& a, const GeoPoint& b,
                    const EarthModel& earth = EarthModel{});

// Initial bearing in degrees [0, 360) travelling from a toward b.
// North = 0, East = 90. Throws DegenerateBearingError when a == b.
double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b);

}  // namespace geoact
