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

#include "geoact/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>
#include <sstream>

namespace geoact {

namespace {

const std::array<std::string, kNumActivities> kActivities = {
    "Arts & Entertainment",
    "College & University",
    "Food",
    "Nightlife Spot",
    "Outdoors & Recreation",
    "Professional & Other Places",
    "Residence",
    "Shop & Service",
    "Travel & Transport",
};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  // from_chars<double> is complete in libstdc++ 11
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, int32_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// Days since 1970-01-01 for a proleptic Gregorian civil date.
int64_t days_from_civil(int64_t y, int m, int d) {
  y -= m <= 2;
  int64_t era = (y >= 0 ? y : y - 399) / 400;
  int64_t yoe = y - era * 400;
  int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

int month_from_name(std::string_view m) {
  static constexpr std::string_view kMonths[] = {
      "Jan", "Feb", "Mar", "Apr", "May", "Jun",
      "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  for (int i = 0; i < 12; ++i)
    if (m == kMonths[i]) return i + 1;
  return 0;
}

bool valid_hms(int h, int mi, int s) {
  return h >= 0 && h < 24 && mi >= 0 && mi < 60 && s >= 0 && s < 61;
}

bool parse_iso(std::string_view t, int64_t& epoch) {
  // YYYY-MM-DD[T ]hh:mm:ss[Z]
  if (t.size() < 19) return false;
  if (t[4] != '-' || t[7] != '-' || (t[10] != 'T' && t[10] != ' ') ||
      t[13] != ':' || t[16] != ':')
    return false;
  auto num = [&](size_t pos, size_t len, int& out) {
    auto sub = t.substr(pos, len);
    int32_t v;
    if (!parse_int(sub, v)) return false;
    out = v;
    return true;
  };
  int y, mo, d, h, mi, s;
  if (!num(0, 4, y) || !num(5, 2, mo) || !num(8, 2, d) || !num(11, 2, h) ||
      !num(14, 2, mi) || !num(17, 2, s))
    return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || !valid_hms(h, mi, s))
    return false;
  if (t.size() > 19 && !(t.size() == 20 && t[19] == 'Z')) return false;
  epoch = days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
  return true;
}

bool parse_fsq_ctime(std::string_view t, int64_t& epoch) {
  // "Tue Apr 03 18:00:09 +0000 2012"
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (start <= t.size()) {
    size_t pos = t.find(' ', start);
    if (pos == std::string_view::npos) {
      if (start < t.size()) parts.push_back(t.substr(start));
      break;
    }
    if (pos > start) parts.push_back(t.substr(start, pos - start));
    start = pos + 1;
  }
  if (parts.size() != 6) return false;
  int mo = month_from_name(parts[1]);
  if (mo == 0) return false;
  int32_t d, y;
  if (!parse_int(parts[2], d) || !parse_int(parts[5], y)) return false;
  std::string_view hms = parts[3];
  if (hms.size() != 8 || hms[2] != ':' || hms[5] != ':') return false;
  int32_t h, mi, s;
  if (!parse_int(hms.substr(0, 2), h) || !parse_int(hms.substr(3, 2), mi) ||
      !parse_int(hms.substr(6, 2), s))
    return false;
  if (d < 1 || d > 31 || !valid_hms(h, mi, s)) return false;
  std::string_view zone = parts[4];
  if (zone.size() != 5 || (zone[0] != '+' && zone[0] != '-')) return false;
  int32_t zhm;
  if (!parse_int(zone.substr(1), zhm)) return false;
  int64_t zone_minutes = (zhm / 100) * 60 + (zhm % 100);
  if (zone[0] == '-') zone_minutes = -zone_minutes;
  epoch = days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s -
          zone_minutes * 60;
  return true;
}

}  // namespace

const std::array<std::string, kNumActivities>& activity_names() {
  return kActivities;
}

int activity_index(std::string_view name) {
  for (int i = 0; i < kNumActivities; ++i)
    if (kActivities[static_cast<size_t>(i)] == name) return i;
  return -1;
}

int64_t parse_timestamp(std::string_view text) {
  int64_t epoch;
  if (parse_iso(text, epoch)) return epoch;
  if (parse_fsq_ctime(text, epoch)) return epoch;
  throw ParseError("unparseable timestamp: " + std::string(text));
}

std::vector<CityConfig> load_city_configs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open city config: " + path);
  std::vector<CityConfig> cities;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_tabs(line);
    if (cols.size() != 4)
      throw ParseError("city config line " + std::to_string(lineno) +
                       ": expected 4 tab-separated columns");
    double lat, lon, radius;
    if (!parse_double(cols[1], lat) || !parse_double(cols[2], lon) ||
        !parse_double(cols[3], radius) || radius <= 0.0)
      throw ParseError("city config line " + std::to_string(lineno) +
                       ": bad numeric field");
    cities.push_back({std::string(cols[0]), GeoPoint(lat, lon), radius});
  }
  if (cities.empty()) throw EmptyInputError("city config has no entries: " + path);
  return cities;
}

ActivityTaxonomy ActivityTaxonomy::load(const std::string& path,
                                        UnknownPolicy policy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open taxonomy: " + path);
  ActivityTaxonomy tax;
  tax.policy = policy;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_tabs(line);
    if (cols.size() != 2)
      throw ParseError("taxonomy line " + std::to_string(lineno) +
                       ": expected 2 tab-separated columns");
    int idx = activity_index(cols[1]);
    if (idx < 0)
      throw ParseError("taxonomy line " + std::to_string(lineno) +
                       ": unknown parent activity '" + std::string(cols[1]) +
                       "'");
    tax.mapping[std::string(cols[0])] = static_cast<int8_t>(idx);
  }
  if (tax.mapping.empty())
    throw EmptyInputError("taxonomy has no entries: " + path);
  return tax;
}

std::optional<int8_t> ActivityTaxonomy::map_category(
    const std::string& raw) const {
  auto it = mapping.find(raw);
  if (it != mapping.end()) return it->second;
  if (policy == UnknownPolicy::Error)
    throw TaxonomyError("unmapped venue category: " + raw);
  return std::nullopt;
}

CellId Dataset::cell_of(const CheckIn& r) const {
  return CellId{anon_family, anon_resolution, r.cell_code};
}

DatasetSummary Dataset::recount() const {
  DatasetSummary s;
  s.checkins = records.size();
  std::vector<uint8_t> seen_u(users.size(), 0), seen_v(venues.size(), 0);
  for (const auto& r : records) {
    if (!seen_u[r.user]) {
      seen_u[r.user] = 1;
      ++s.users;
    }
    if (!seen_v[r.venue]) {
      seen_v[r.venue] = 1;
      ++s.venues;
    }
  }
  return s;
}

std::vector<RawCheckIn> parse_checkins(std::istream& in, ParseStats* stats) {
  std::vector<RawCheckIn> out;
  ParseStats local;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++local.total_lines;
    auto cols = split_tabs(line);
    if (cols.size() != 8) {
      ++local.malformed;
      continue;
    }
    RawCheckIn r;
    double lat, lon;
    int32_t tz;
    if (cols[0].empty() || cols[1].empty() || cols[3].empty() ||
        !parse_double(cols[4], lat) || !parse_double(cols[5], lon) ||
        !parse_int(cols[6], tz) || lat < -90.0 || lat > 90.0 || lon < -180.0 ||
        lon > 180.0) {
      ++local.malformed;
      continue;
    }
    try {
      r.utc_epoch = parse_timestamp(cols[7]);
    } catch (const ParseError&) {
      ++local.malformed;
      continue;
    }
    r.user_id = std::string(cols[0]);
    r.venue_id = std::string(cols[1]);
    r.venue_category = std::string(cols[3]);
    r.lat = lat;
    r.lon = normalize_lon(lon);
    r.tz_offset_minutes = tz;
    out.push_back(std::move(r));
    ++local.parsed;
  }
  if (stats) *stats = local;
  if (local.total_lines == 0) throw EmptyInputError("check-in input is empty");
  if (local.malformed * 100 > local.total_lines)
    throw IngestQualityError(
        "more than 1% of input lines are malformed (" +
        std::to_string(local.malformed) + " of " +
        std::to_string(local.total_lines) + ")");
  return out;
}

std::optional<size_t> assign_city(const RawCheckIn& r,
                                  const std::vector<CityConfig>& cities) {
  GeoPoint p(r.lat, r.lon);
  std::optional<size_t> best;
  double best_dist = 0.0;
  for (size_t i = 0; i < cities.size(); ++i) {
    double d = haversine_km(p, cities[i].center);
    if (d > cities[i].assignment_radius_km) continue;
    if (!best || d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return best;
}

std::vector<Dataset> build_dataset(const std::vector<RawCheckIn>& raw,
                                   const std::vector<CityConfig>& cities,
                                   const ActivityTaxonomy& taxonomy,
                                   const AnonymizationConfig& anon,
                                   IngestReport* report) {
  if (cities.empty()) throw InvalidInputError("no cities configured");
  IngestReport rep;
  rep.input_records = raw.size();

  std::vector<Dataset> out(cities.size());
  std::vector<std::unordered_map<std::string, uint32_t>> user_idx(cities.size());
  std::vector<std::unordered_map<std::string, uint32_t>> venue_idx(cities.size());
  for (size_t i = 0; i < cities.size(); ++i) {
    out[i].city = cities[i].name;
    out[i].anon_family = GridFamily::Geohash;
    out[i].anon_resolution = anon.resolution;
  }

  // City assignment is parallel over records; assembly is one fixed-order pass.
  std::vector<int32_t> city_of(raw.size(), -1);
  parallel_for(raw.size(), [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      auto c = assign_city(raw[i], cities);
      city_of[i] = c ? static_cast<int32_t>(*c) : -1;
    }
  });

  for (size_t i = 0; i < raw.size(); ++i) {
    if (city_of[i] < 0) {
      ++rep.outside_cities;
      continue;
    }
    const RawCheckIn& r = raw[i];
    auto activity = taxonomy.map_category(r.venue_category);
    if (!activity) {
      ++rep.unknown_category;
      continue;
    }
    size_t c = static_cast<size_t>(city_of[i]);
    Dataset& d = out[c];
    CheckIn rec;
    auto [uit, uinserted] =
        user_idx[c].emplace(r.user_id, static_cast<uint32_t>(d.users.size()));
    if (uinserted) d.users.push_back(r.user_id);
    rec.user = uit->second;
    auto [vit, vinserted] =
        venue_idx[c].emplace(r.venue_id, static_cast<uint32_t>(d.venues.size()));
    if (vinserted) d.venues.push_back(r.venue_id);
    rec.venue = vit->second;
    rec.cell_code =
        encode(GeoPoint(r.lat, r.lon), GridFamily::Geohash, anon.resolution)
            .code;
    rec.local_epoch = r.utc_epoch + int64_t(r.tz_offset_minutes) * 60;
    rec.activity = *activity;
    d.records.push_back(std::move(rec));
  }

  for (auto& d : out) {
    d.summary = d.recount();
    if (d.records.empty())
      rep.warnings.push_back("city '" + d.city + "' has no records");
  }
  if (report) *report = rep;
  return out;
}

SplitReport split_dataset(Dataset& d, double test_fraction, uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidInputError("test_fraction must be in (0, 1)");
  SplitReport rep;
  d.is_test.assign(d.records.size(), 0);
  d.test_fraction = test_fraction;
  d.split_seed = seed;

  std::array<std::vector<uint32_t>, kNumActivities> by_class;
  for (size_t i = 0; i < d.records.size(); ++i)
    by_class[static_cast<size_t>(d.records[i].activity)].push_back(
        static_cast<uint32_t>(i));

  uint64_t eligible = 0;
  for (int c = 0; c < kNumActivities; ++c) {
    size_t n = by_class[static_cast<size_t>(c)].size();
    if (n == 1) rep.unsplittable_classes.push_back(c);
    if (n >= 2) eligible += n;
  }
  if (eligible == 0) return rep;

  // Hamilton apportionment of round(f * eligible) over eligible classes.
  uint64_t target = static_cast<uint64_t>(
      std::llround(test_fraction * static_cast<double>(eligible)));
  std::array<uint64_t, kNumActivities> take{};
  std::vector<std::pair<double, int>> remainders;
  uint64_t allotted = 0;
  for (int c = 0; c < kNumActivities; ++c) {
    size_t n = by_class[static_cast<size_t>(c)].size();
    if (n < 2) continue;
    double quota = test_fraction * static_cast<double>(n);
    uint64_t base = static_cast<uint64_t>(std::floor(quota));
    if (base > n - 1) base = n - 1;  // keep at least one training record
    take[static_cast<size_t>(c)] = base;
    allotted += base;
    remainders.emplace_back(quota - std::floor(quota), c);
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  for (const auto& [frac, c] : remainders) {
    if (allotted >= target) break;
    size_t n = by_class[static_cast<size_t>(c)].size();
    if (take[static_cast<size_t>(c)] < n - 1) {
      ++take[static_cast<size_t>(c)];
      ++allotted;
    }
  }
  // every class with >= 2 records contributes at least one test record
  for (int c = 0; c < kNumActivities; ++c) {
    size_t n = by_class[static_cast<size_t>(c)].size();
    if (n >= 2 && take[static_cast<size_t>(c)] == 0)
      take[static_cast<size_t>(c)] = 1;
  }

  for (int c = 0; c < kNumActivities; ++c) {
    auto& idx = by_class[static_cast<size_t>(c)];
    uint64_t k = take[static_cast<size_t>(c)];
    if (k == 0 || idx.empty()) continue;
    std::mt19937_64 rng(mix_seed(seed, static_cast<uint64_t>(c)));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (uint64_t i = 0; i < k; ++i) d.is_test[idx[i]] = 1;
    rep.test_count += k;
  }
  return rep;
}

}  // namespace geoact
