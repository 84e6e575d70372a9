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

#include "geoact/geodesy.hpp"

#include <cmath>

namespace geoact {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

inline double deg2rad(double d) { return d * (kPi / 180.0); }
inline double rad2deg(double r) { return r * (180.0 / kPi); }

}  // namespace

double normalize_lon(double lon_deg) {
  double x = std::fmod(lon_deg + 180.0, 360.0);
  if (x < 0.0) x += 360.0;
  return x - 180.0;
}

GeoPoint::GeoPoint(double lat_deg, double lon_deg) {
  if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg))
    throw InvalidInputError("GeoPoint: non-finite coordinate");
  if (lat_deg < -90.0 || lat_deg > 90.0)
    throw InvalidInputError("GeoPoint: latitude out of [-90, 90]");
  lat = lat_deg;
  lon = normalize_lon(lon_deg);
}

double haversine_km(const GeoPoint& a, const GeoPoint& b,
                    const EarthModel& earth) {
  if (earth.radius_km <= 0.0)
    throw InvalidInputError("EarthModel: radius must be positive");
  double phi1 = deg2rad(a.lat);
  double phi2 = deg2rad(b.lat);
  double sin_dphi = std::sin((phi2 - phi1) * 0.5);
  double sin_dlam = std::sin(deg2rad(b.lon - a.lon) * 0.5);
  double h = sin_dphi * sin_dphi +
             std::cos(phi1) * std::cos(phi2) * sin_dlam * sin_dlam;
  // clamp the intermediate: rounding can push it a hair outside [0, 1]
  if (h < 0.0) h = 0.0;
  if (h > 1.0) h = 1.0;
  double c = 2.0 * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
  return earth.radius_km * c;
}

double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b) {
  if (a == b)
    throw DegenerateBearingError("initial_bearing_deg: coincident points");
  double phi1 = deg2rad(a.lat);
  double phi2 = deg2rad(b.lat);
  double dlam = deg2rad(b.lon - a.lon);
  double y = std::sin(dlam) * std::cos(phi2);
  double x = std::cos(phi1) * std::sin(phi2) -
             std::sin(phi1) * std::cos(phi2) * std::cos(dlam);
  double theta = rad2deg(std::atan2(y, x));
  if (theta < 0.0) theta += 360.0;
  if (theta >= 360.0) theta -= 360.0;
  return theta;
}

}  // namespace geoact
