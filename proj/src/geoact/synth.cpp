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

#include "geoact/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "geoact/ingest.hpp"

namespace geoact {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kKmPerDegLat = 111.32;
constexpr int kClustersPerActivity = 3;
constexpr int kVenueCandidates = 8;
// 2012-04-03, matching an 18-month collection window
constexpr int64_t kStartDay = 15433;
constexpr int kWindowDays = 540;

struct ActivityProfile {
  double radius_mean_km;
  double radius_sd_km;
  double sector_deg;       // preferred bearing from the city center
  double hour_mean;        // local hour-of-day profile
  double hour_sd;
  double weekday_prob;
};

// index order = alphabetical activity order
constexpr std::array<ActivityProfile, kNumActivities> kProfiles = {{
    {2.5, 1.2, 45.0, 19.0, 3.0, 0.50},   // Arts & Entertainment
    {5.0, 1.5, 90.0, 13.0, 3.5, 0.85},   // College & University
    {2.0, 1.5, 0.0, 17.0, 4.0, 0.60},    // Food
    {1.2, 0.8, 135.0, 23.0, 2.0, 0.35},  // Nightlife Spot
    {9.0, 4.0, 180.0, 11.0, 3.0, 0.45},  // Outdoors & Recreation
    {1.5, 1.0, 225.0, 11.0, 3.0, 0.90},  // Professional & Other Places
    {7.0, 3.0, 270.0, 21.0, 4.0, 0.65},  // Residence
    {3.0, 1.5, 315.0, 15.0, 3.5, 0.55},  // Shop & Service
    {4.0, 3.0, 0.0, 9.0, 5.0, 0.70},     // Travel & Transport
}};

constexpr std::array<double, kNumActivities> kVenuePrior = {
    0.08, 0.05, 0.25, 0.08, 0.10, 0.12, 0.07, 0.15, 0.10};

const std::array<std::vector<std::string>, kNumActivities>& raw_names() {
  static const std::array<std::vector<std::string>, kNumActivities> names = {{
      {"Movie Theater", "Art Gallery", "Music Venue", "Museum"},
      {"University", "College Classroom", "Student Center", "College Library"},
      {"Ramen / Noodle House", "Café", "Burger Joint", "Sushi Restaurant"},
      {"Bar", "Nightclub", "Pub", "Cocktail Bar"},
      {"Park", "Playground", "Trail", "Beach"},
      {"Office", "Coworking Space", "Convention Center", "Medical Center"},
      {"Home (private)", "Residential Building (Apartment / Condo)",
       "Housing Development"},
      {"Mall", "Clothing Store", "Convenience Store", "Electronics Store"},
      {"Train Station", "Airport", "Bus Station", "Subway"},
  }};
  return names;
}

struct CivilDate {
  int year;
  int month;
  int day;
};

CivilDate civil_from_days(int64_t z) {
  z += 719468;
  int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  int64_t doe = z - era * 146097;
  int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  int64_t y = yoe + era * 400;
  int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  int64_t mp = (5 * doy + 2) / 153;
  int64_t d = doy - (153 * mp + 2) / 5 + 1;
  int64_t m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m),
          static_cast<int>(d)};
}

std::string format_fsq_time(int64_t utc_epoch) {
  static constexpr const char* kDows[7] = {"Thu", "Fri", "Sat", "Sun",
                                           "Mon", "Tue", "Wed"};
  static constexpr const char* kMonths[12] = {"Jan", "Feb", "Mar", "Apr",
                                              "May", "Jun", "Jul", "Aug",
                                              "Sep", "Oct", "Nov", "Dec"};
  int64_t day = utc_epoch >= 0 ? utc_epoch / 86400 : (utc_epoch - 86399) / 86400;
  int64_t sod = utc_epoch - day * 86400;
  CivilDate cd = civil_from_days(day);
  int64_t dow = ((day % 7) + 7) % 7;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s %s %02d %02lld:%02lld:%02lld +0000 %d",
                kDows[dow], kMonths[cd.month - 1], cd.day,
                static_cast<long long>(sod / 3600),
                static_cast<long long>((sod % 3600) / 60),
                static_cast<long long>(sod % 60), cd.year);
  return buf;
}

double round6(double x) { return std::round(x * 1e6) / 1e6; }

struct Venue {
  double lat;
  double lon;
  int activity;
  int raw_index;
};

}  // namespace

void generate_synthetic_city(const SynthCityParams& params, uint64_t seed,
                             std::ostream& out) {
  if (params.n_checkins == 0 || params.n_venues == 0 || params.n_users == 0)
    throw InvalidInputError("synthetic city: counts must be positive");
  std::mt19937_64 rng(mix_seed(seed, fnv1a64(params.name)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> stdn(0.0, 1.0);

  const double km_per_deg_lon =
      kKmPerDegLat * std::cos(params.center.lat * kPi / 180.0);

  // activity clusters
  struct Cluster {
    double lat, lon, sd_km;
  };
  std::array<std::array<Cluster, kClustersPerActivity>, kNumActivities>
      clusters;
  for (int a = 0; a < kNumActivities; ++a) {
    const ActivityProfile& pf = kProfiles[static_cast<size_t>(a)];
    for (int c = 0; c < kClustersPerActivity; ++c) {
      double r = std::max(0.2, pf.radius_mean_km + pf.radius_sd_km * stdn(rng));
      double theta = (pf.sector_deg + 50.0 * stdn(rng)) * kPi / 180.0;
      Cluster& cl = clusters[static_cast<size_t>(a)][static_cast<size_t>(c)];
      cl.lat = params.center.lat + (r * std::cos(theta)) / kKmPerDegLat;
      cl.lon = params.center.lon + (r * std::sin(theta)) / km_per_deg_lon;
      cl.sd_km = 0.7 + 0.8 * unit(rng);
    }
  }

  // venues
  std::vector<Venue> venues(params.n_venues);
  std::vector<std::vector<uint32_t>> venues_by_activity(kNumActivities);
  std::discrete_distribution<int> activity_prior(kVenuePrior.begin(),
                                                 kVenuePrior.end());
  for (size_t v = 0; v < params.n_venues; ++v) {
    int a = activity_prior(rng);
    const Cluster& cl = clusters[static_cast<size_t>(a)][static_cast<size_t>(
        std::uniform_int_distribution<int>(0, kClustersPerActivity - 1)(rng))];
    Venue& vn = venues[v];
    vn.activity = a;
    vn.lat = round6(cl.lat + cl.sd_km * stdn(rng) / kKmPerDegLat);
    vn.lon = round6(cl.lon + cl.sd_km * stdn(rng) / km_per_deg_lon);
    vn.lat = std::clamp(vn.lat, -89.999999, 89.999999);
    vn.raw_index = std::uniform_int_distribution<int>(
        0,
        static_cast<int>(raw_names()[static_cast<size_t>(a)].size()) - 1)(rng);
    venues_by_activity[static_cast<size_t>(a)].push_back(
        static_cast<uint32_t>(v));
  }
  // every activity keeps at least one venue so user preferences stay total
  for (int a = 0; a < kNumActivities; ++a) {
    if (!venues_by_activity[static_cast<size_t>(a)].empty()) continue;
    uint32_t v = std::uniform_int_distribution<uint32_t>(
        0, static_cast<uint32_t>(params.n_venues) - 1)(rng);
    venues_by_activity[static_cast<size_t>(venues[v].activity)]
        .erase(std::find(
            venues_by_activity[static_cast<size_t>(venues[v].activity)]
                .begin(),
            venues_by_activity[static_cast<size_t>(venues[v].activity)].end(),
            v));
    venues[v].activity = a;
    venues[v].raw_index = 0;
    venues_by_activity[static_cast<size_t>(a)].push_back(v);
  }

  // users: home + activity preference + volume weight
  struct User {
    double home_lat, home_lon;
    std::array<double, kNumActivities> pref;
  };
  std::vector<User> users(params.n_users);
  std::vector<double> user_weight(params.n_users);
  for (size_t u = 0; u < params.n_users; ++u) {
    const Venue& home = venues[std::uniform_int_distribution<size_t>(
        0, params.n_venues - 1)(rng)];
    users[u].home_lat = home.lat + 0.5 * stdn(rng) / kKmPerDegLat;
    users[u].home_lon = home.lon + 0.5 * stdn(rng) / km_per_deg_lon;
    double total = 0.0;
    for (int a = 0; a < kNumActivities; ++a) {
      users[u].pref[static_cast<size_t>(a)] =
          kVenuePrior[static_cast<size_t>(a)] * std::exp(0.9 * stdn(rng));
      total += users[u].pref[static_cast<size_t>(a)];
    }
    for (double& p : users[u].pref) p /= total;
    user_weight[u] = std::pow(static_cast<double>(u + 1), -0.6);
  }
  std::discrete_distribution<size_t> user_pick(user_weight.begin(),
                                               user_weight.end());

  // local-calendar day pools
  std::vector<int> weekdays, weekends;
  for (int d = 0; d < kWindowDays; ++d) {
    int64_t day = kStartDay + d;
    int dow = static_cast<int>((day + 3) % 7);  // Monday = 0
    (dow >= 5 ? weekends : weekdays).push_back(d);
  }

  char line[512];
  for (size_t i = 0; i < params.n_checkins; ++i) {
    size_t u = user_pick(rng);
    bool noise = unit(rng) < params.noise_fraction;

    uint32_t venue_idx;
    if (noise) {
      venue_idx = std::uniform_int_distribution<uint32_t>(
          0, static_cast<uint32_t>(params.n_venues) - 1)(rng);
    } else {
      std::discrete_distribution<int> pref(users[u].pref.begin(),
                                           users[u].pref.end());
      int a = pref(rng);
      const auto& pool = venues_by_activity[static_cast<size_t>(a)];
      venue_idx = pool[std::uniform_int_distribution<size_t>(
          0, pool.size() - 1)(rng)];
      double best = std::numeric_limits<double>::max();
      for (int cand = 0; cand < kVenueCandidates; ++cand) {
        uint32_t v = pool[std::uniform_int_distribution<size_t>(
            0, pool.size() - 1)(rng)];
        double dlat = (venues[v].lat - users[u].home_lat) * kKmPerDegLat;
        double dlon = (venues[v].lon - users[u].home_lon) * km_per_deg_lon;
        double d2 = dlat * dlat + dlon * dlon;
        if (d2 < best) {
          best = d2;
          venue_idx = v;
        }
      }
    }
    const Venue& venue = venues[venue_idx];
    const ActivityProfile& pf = kProfiles[static_cast<size_t>(venue.activity)];

    int day_offset;
    double hour;
    if (noise) {
      day_offset = std::uniform_int_distribution<int>(0, kWindowDays - 1)(rng);
      hour = 24.0 * unit(rng);
    } else {
      const auto& pool = unit(rng) < pf.weekday_prob ? weekdays : weekends;
      day_offset = pool[std::uniform_int_distribution<size_t>(
          0, pool.size() - 1)(rng)];
      hour = std::fmod(pf.hour_mean + pf.hour_sd * stdn(rng), 24.0);
      if (hour < 0.0) hour += 24.0;
    }
    int64_t local_epoch = (kStartDay + day_offset) * 86400 +
                          static_cast<int64_t>(hour * 3600.0);
    int64_t utc_epoch =
        local_epoch - static_cast<int64_t>(params.tz_offset_minutes) * 60;

    const std::string& category =
        raw_names()[static_cast<size_t>(venue.activity)]
                   [static_cast<size_t>(venue.raw_index)];
    std::snprintf(line, sizeof(line),
                  "u%zu\tv%u\tsyncat%d_%d\t%s\t%.6f\t%.6f\t%d\t%s\n", u,
                  venue_idx, venue.activity, venue.raw_index, category.c_str(),
                  venue.lat, venue.lon, params.tz_offset_minutes,
                  format_fsq_time(utc_epoch).c_str());
    out << line;
  }
}

std::vector<SynthCityParams> default_synthetic_cities() {
  // check-ins per venue sits near 5, like the sparser published cities
  return {
      {"Los Angeles", GeoPoint(34.0522, -118.2437), -480, 3200, 700, 130, 0.08},
      {"Tokyo", GeoPoint(35.6762, 139.6503), 540, 5200, 1100, 170, 0.08},
      {"Mumbai", GeoPoint(19.0760, 72.8777), 330, 2400, 520, 100, 0.08},
      {"Sydney", GeoPoint(-33.8688, 151.2093), 600, 2600, 560, 110, 0.08},
      {"Paris", GeoPoint(48.8566, 2.3522), 60, 2800, 600, 120, 0.08},
      {"Milan", GeoPoint(45.4642, 9.1900), 60, 2500, 540, 105, 0.08},
  };
}

}  // namespace geoact
