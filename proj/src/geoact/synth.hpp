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

#include <iosfwd>
#include <string>
#include <vector>

#include "geoact/geodesy.hpp"

namespace geoact {

// Synthetic check-in generator producing fsq-tsv lines around a city center.
//
// Recipe (all draws seeded):
//  - each of the nine activities owns 3 spatial clusters; a cluster sits at
//    distance ~ N(mu_r, sd_r) km from the center (activity-specific radial
//    profile) along an activity-preferred bearing sector, with ~1 km spread;
//  - venues draw an activity from a fixed prior, a cluster uniformly, and a
//    2-D normal offset inside the cluster; coordinates round to 1e-6 deg;
//  - users get a home venue and a preference distribution over activities
//    (prior perturbed by log-normal noise); user volume follows a power law;
//  - a check-in picks a user, an activity from their preference, and the
//    closest-to-home of a few candidate venues of that activity; timestamps
//    follow activity-specific hour-of-day and weekday/weekend profiles over
//    an 18-month window;
//  - a noise fraction of check-ins picks a uniformly random venue and time.
struct SynthCityParams {
  std::string name;
  GeoPoint center;
  int tz_offset_minutes = 0;
  size_t n_checkins = 4000;
  size_t n_venues = 320;
  size_t n_users = 140;
  double noise_fraction = 0.08;
};

void generate_synthetic_city(const SynthCityParams& params, uint64_t seed,
                             std::ostream& out);

// Six desk-scale cities matching the bundled city-config fixture.
std::vector<SynthCityParams> default_synthetic_cities();

}  // namespace geoact
