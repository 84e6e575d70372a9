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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "test_support.hpp"

using namespace geoact;

namespace {

Dataset three_record_dataset() {
  // {(u1,v1,cA),(u2,v1,cA),(u1,v2,cB)} with cA != cB at resolution 6
  Dataset d;
  d.city = "T";
  d.anon_resolution = 6;
  d.users = {"u1", "u2"};
  d.venues = {"v1", "v2"};
  GeoPoint a(35.68, 139.70), b(35.90, 139.95);
  auto add = [&](uint32_t u, uint32_t v, const GeoPoint& p, int8_t act) {
    CheckIn r;
    r.user = u;
    r.venue = v;
    r.cell_code = encode(p, GridFamily::Geohash, 6).code;
    r.local_epoch = 1333476009;
    r.activity = act;
    d.records.push_back(r);
  };
  add(0, 0, a, 2);
  add(1, 0, a, 2);
  add(0, 1, b, 6);
  d.summary = d.recount();
  return d;
}

std::vector<uint32_t> all_rows(const Dataset& d) {
  std::vector<uint32_t> rows(d.records.size());
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = uint32_t(i);
  return rows;
}

}  // namespace

TEST_CASE("grid stats match the hand count") {
  Dataset d = three_record_dataset();
  GridStats stats = compute_grid_stats(d, all_rows(d), GridFamily::Geohash, 6);
  REQUIRE(stats.cells.size() == 2);
  std::string ca = d.records[0].cell_code, cb = d.records[2].cell_code;
  CHECK(stats.cells.at(ca).poi_count == 1);
  CHECK(stats.cells.at(ca).user_count == 2);
  CHECK(stats.cells.at(ca).checkin_count == 2);
  CHECK(stats.cells.at(cb).poi_count == 1);
  CHECK(stats.cells.at(cb).user_count == 1);
  CHECK(stats.cells.at(cb).checkin_count == 1);
  // conservation
  int total = 0;
  for (const auto& [code, st] : stats.cells) total += st.checkin_count;
  CHECK(total == 3);
}

TEST_CASE("single record gets (1,1,1) and empty train is an error") {
  Dataset d = three_record_dataset();
  GridStats stats = compute_grid_stats(d, {2}, GridFamily::Geohash, 6);
  REQUIRE(stats.cells.size() == 1);
  const CellStats& st = stats.cells.begin()->second;
  CHECK(st.poi_count == 1);
  CHECK(st.user_count == 1);
  CHECK(st.checkin_count == 1);
  CHECK_THROWS_AS(compute_grid_stats(d, {}, GridFamily::Geohash, 6),
                  EmptyInputError);
}

TEST_CASE("conservation holds for every ladder pair") {
  Dataset d = testing::make_tiny_dataset(400, 17);
  FeatureSpec spec;
  spec.ladder = ResolutionLadder{{{GridFamily::Geohash, {4, 6, 9}},
                                  {GridFamily::OffsetGeohash, {4, 6, 9}}}};
  TrainContext ctx = build_train_context(d, spec);
  for (const auto& stats : ctx.stats) {
    long total = 0;
    for (const auto& [code, st] : stats.cells) total += st.checkin_count;
    CHECK(total == long(d.records.size()));
  }
}

TEST_CASE("relative location follows the cell center") {
  GeoPoint center(35.6762, 139.6503);
  CellId cell = encode(center, GridFamily::Geohash, 7);
  // city center placed exactly at the cell center: degenerate rule
  auto [d0, th0] = relative_location(cell, decode(cell).center());
  CHECK(d0 == 0.0);
  CHECK(th0 == 0.0);
  // compositional identity
  auto [d1, th1] = relative_location(cell, center);
  CHECK(d1 == haversine_km(decode(cell).center(), center));
}

TEST_CASE("a cell due south of the center points north") {
  GeoPoint center(35.6762, 139.6503);
  GeoPoint south(center.lat - 0.09, center.lon);  // ~10 km south
  CellId cell = encode(south, GridFamily::Geohash, 10);
  auto [dist, bearing] = relative_location(cell, center);
  CHECK(dist == doctest::Approx(10.0).epsilon(0.05));
  double off_north = std::min(bearing, 360.0 - bearing);
  CHECK(off_north < 2.0);
}

TEST_CASE("timestamp encoding hits the closed-form angles") {
  // 1970-01-05 was a Monday
  int64_t monday_midnight = 4 * 86400;
  auto mm = encode_timestamp(monday_midnight);
  CHECK(mm[0] == doctest::Approx(0.0).epsilon(1e-12));  // sin hour
  CHECK(mm[1] == doctest::Approx(1.0).epsilon(1e-12));  // cos hour
  CHECK(mm[2] == doctest::Approx(0.0).epsilon(1e-12));  // sin dow (Mon = 0)
  CHECK(mm[3] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mm[4] == 0.0);

  auto noon = encode_timestamp(monday_midnight + 12 * 3600);
  CHECK(std::fabs(noon[0]) < 1e-9);
  CHECK(noon[1] == doctest::Approx(-1.0).epsilon(1e-12));

  // 1970-01-10 was a Saturday; 18:00 is a 270 degree hour angle
  int64_t sat_18 = 9 * 86400 + 18 * 3600;
  auto sat = encode_timestamp(sat_18);
  CHECK(sat[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(std::fabs(sat[1]) < 1e-9);
  CHECK(sat[4] == 1.0);

  // negative epochs (pre-1970 local times) stay well-defined
  auto old = encode_timestamp(-1);
  CHECK(std::isfinite(old[0]));
  CHECK((old[4] == 0.0 || old[4] == 1.0));
}

TEST_CASE("user encoding: cold start, counts and modal activity") {
  Dataset d;
  d.city = "T";
  d.anon_resolution = 6;
  d.users = {"heavy", "single", "cold"};
  d.venues = {"v"};
  auto add = [&](uint32_t u, int8_t act) {
    CheckIn r;
    r.user = u;
    r.venue = 0;
    r.cell_code = "u4pruy";
    r.activity = act;
    d.records.push_back(r);
  };
  int food = activity_index("Food");
  int residence = activity_index("Residence");
  for (int i = 0; i < 7; ++i) add(0, int8_t(food));
  add(0, int8_t(residence));
  add(1, int8_t(residence));
  d.summary = d.recount();

  FeatureSpec spec;
  spec.ladder = ResolutionLadder::single(GridFamily::Geohash, {6});
  TrainContext ctx = build_train_context(d, spec);

  auto heavy = encode_user(0, ctx);
  CHECK(heavy[0] == doctest::Approx(std::log1p(8.0)));
  CHECK(heavy[1] == double(food));  // 7 Food beats 1 Residence
  auto single = encode_user(1, ctx);
  CHECK(single[0] == doctest::Approx(std::log(2.0)));  // log1p(1) = ln 2
  CHECK(single[1] == double(residence));
  auto cold = encode_user(2, ctx);
  CHECK(cold[0] == 0.0);
  CHECK(cold[1] == -1.0);
}

TEST_CASE("dimension arithmetic matches the fixed layout") {
  FeatureSpec spec;  // default: 2 families x 7 resolutions, everything on
  CHECK(spec.dimension() == 79);
  CHECK(spec.column_names().size() == 79);

  FeatureSpec no_stats = spec;
  no_stats.stat_poi = no_stats.stat_user = no_stats.stat_checkin = false;
  CHECK(no_stats.dimension() == 79 - 14 * 4);

  FeatureSpec partial = spec;
  partial.stat_poi = false;  // 3 columns per pair instead of 4
  CHECK(partial.dimension() == 79 - 14);

  FeatureSpec bare = no_stats;
  bare.include_user = false;
  bare.include_time = false;
  bare.include_distance = false;
  bare.include_bearing = false;
  CHECK(bare.dimension() == 14);  // ordinals only
  CHECK(spec.fingerprint() != no_stats.fingerprint());
}

TEST_CASE("assembly is deterministic, finite and dimension-sound") {
  Dataset d = testing::make_tiny_dataset(300, 23);
  split_dataset(d, 0.2, 7);
  CityConfig city{"T", GeoPoint(35.6762, 139.6503), 35.0};
  FeatureSpec spec;
  spec.ladder = ResolutionLadder{{{GridFamily::Geohash, {5, 7, 9}},
                                  {GridFamily::OffsetGeohash, {5, 7, 9}}}};
  TrainContext ctx = build_train_context(d, spec);
  FeatureMatrix m1 = assemble_features(d, SplitFilter::All, spec, ctx, city);
  FeatureMatrix m2 = assemble_features(d, SplitFilter::All, spec, ctx, city);
  CHECK(m1.values == m2.values);
  CHECK(m1.cols == spec.dimension());
  CHECK(m1.rows == d.records.size());
  for (float v : m1.values) CHECK(std::isfinite(v));
  // delta >= 0 and bearing within [0, 360)
  auto names = spec.column_names();
  size_t dist_col = 0, bear_col = 0;
  for (size_t j = 0; j < names.size(); ++j) {
    if (names[j] == "rel_dist_km") dist_col = j;
    if (names[j] == "rel_bearing_deg") bear_col = j;
  }
  for (size_t i = 0; i < m1.rows; ++i) {
    CHECK(m1.row(i)[dist_col] >= 0.0f);
    CHECK(m1.row(i)[bear_col] >= 0.0f);
    CHECK(m1.row(i)[bear_col] < 360.0f);
  }
  // split filters partition the rows
  FeatureMatrix tr = assemble_features(d, SplitFilter::TrainOnly, spec, ctx,
                                       city);
  FeatureMatrix te = assemble_features(d, SplitFilter::TestOnly, spec, ctx,
                                       city);
  CHECK(tr.rows + te.rows == m1.rows);
}

TEST_CASE("ablating a group leaves the remaining columns bit-identical") {
  Dataset d = testing::make_tiny_dataset(200, 29);
  split_dataset(d, 0.2, 3);
  CityConfig city{"T", GeoPoint(35.6762, 139.6503), 35.0};
  FeatureSpec full;
  full.ladder = ResolutionLadder{{{GridFamily::Geohash, {6, 8}}}};
  FeatureSpec nostats = full;
  nostats.stat_poi = nostats.stat_user = nostats.stat_checkin = false;

  TrainContext ctx_full = build_train_context(d, full);
  TrainContext ctx_ns = build_train_context(d, nostats);
  FeatureMatrix a = assemble_features(d, SplitFilter::All, full, ctx_full, city);
  FeatureMatrix b =
      assemble_features(d, SplitFilter::All, nostats, ctx_ns, city);
  CHECK(b.cols == a.cols - 2 * 4);
  // columns shared by name must be identical
  for (size_t jb = 0; jb < b.cols; ++jb) {
    size_t ja = SIZE_MAX;
    for (size_t j = 0; j < a.cols; ++j)
      if (a.column_names[j] == b.column_names[jb]) ja = j;
    REQUIRE(ja != SIZE_MAX);
    for (size_t i = 0; i < a.rows; ++i)
      CHECK(a.row(i)[ja] == b.row(i)[jb]);
  }
}

TEST_CASE("train-split stats exclude test records (no leakage)") {
  Dataset d = three_record_dataset();
  d.is_test = {0, 0, 1};  // third record held out
  FeatureSpec spec;
  spec.ladder = ResolutionLadder::single(GridFamily::Geohash, {6});
  TrainContext ctx = build_train_context(d, spec);
  CHECK(ctx.train_count == 2);
  CHECK(ctx.stats[0].cells.count(d.records[2].cell_code) == 0);

  // moving the held-out record flips which cell is unseen
  d.is_test = {1, 0, 0};
  TrainContext ctx2 = build_train_context(d, spec);
  CHECK(ctx2.stats[0].cells.count(d.records[2].cell_code) == 1);
  CHECK(ctx2.stats[0].cells.at(d.records[0].cell_code).checkin_count == 1);

  // unseen cells: ordinal -1, zero stats, seen flag 0
  d.is_test = {0, 0, 1};
  CityConfig city{"T", GeoPoint(35.6762, 139.6503), 35.0};
  FeatureMatrix te = assemble_features(d, SplitFilter::TestOnly, spec, ctx,
                                       city);
  auto names = spec.column_names();
  for (size_t j = 0; j < names.size(); ++j) {
    if (names[j] == "loc_gh6_ordinal") CHECK(te.row(0)[j] == -1.0f);
    if (names[j] == "st_gh6_poi") CHECK(te.row(0)[j] == 0.0f);
    if (names[j] == "st_gh6_seen") CHECK(te.row(0)[j] == 0.0f);
  }
}

TEST_CASE("feature resolutions finer than the anonymization grid are refused") {
  Dataset d = testing::make_tiny_dataset(50, 31);  // anonymized at 9
  FeatureSpec spec;
  spec.ladder = ResolutionLadder::single(GridFamily::Geohash, {10});
  CHECK_THROWS_AS(build_train_context(d, spec), InvalidInputError);
}

TEST_CASE("feature csv export carries headers and rows") {
  Dataset d = testing::make_tiny_dataset(40, 37);
  split_dataset(d, 0.2, 7);
  CityConfig city{"T", GeoPoint(35.6762, 139.6503), 35.0};
  FeatureSpec spec;
  spec.ladder = ResolutionLadder::single(GridFamily::Geohash, {6});
  TrainContext ctx = build_train_context(d, spec);
  FeatureMatrix m = assemble_features(d, SplitFilter::All, spec, ctx, city);
  auto path = std::filesystem::temp_directory_path() / "geoact_features.csv";
  write_feature_csv(m, path.string());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("record_id") == 0);
  CHECK(header.find("st_gh6_checkin") != std::string::npos);
  CHECK(header.find(",label") != std::string::npos);
  size_t lines = 0;
  std::string l;
  while (std::getline(in, l)) ++lines;
  CHECK(lines == m.rows);
}
