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

#include "geoact/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

namespace geoact {

namespace {

constexpr double kTwoPi = 6.28318530717958647692528676655900577;

std::string pair_tag(GridFamily f, int res) {
  std::string s(family_token(f));
  s += std::to_string(res);
  return s;
}

}  // namespace

size_t FeatureSpec::dimension() const {
  ladder.validate();
  size_t pairs = ladder.scale_count();
  size_t d = 0;
  if (include_user) d += 2;
  if (include_time) d += 5;
  d += pairs;  // per-scale cell ordinals
  if (include_distance) d += 1;
  if (include_bearing) d += 1;
  d += pairs * static_cast<size_t>(stats_per_pair());
  return d;
}

int FeatureSpec::stats_per_pair() const {
  int s = (stat_poi ? 1 : 0) + (stat_user ? 1 : 0) + (stat_checkin ? 1 : 0);
  return s > 0 ? s + 1 : 0;  // + seen flag
}

std::vector<std::string> FeatureSpec::column_names() const {
  std::vector<std::string> names;
  names.reserve(dimension());
  if (include_user) {
    names.emplace_back("user_logcount");
    names.emplace_back("user_modal_activity");
  }
  if (include_time) {
    names.emplace_back("t_hour_sin");
    names.emplace_back("t_hour_cos");
    names.emplace_back("t_dow_sin");
    names.emplace_back("t_dow_cos");
    names.emplace_back("t_weekend");
  }
  auto pairs = ladder.pairs();
  for (const auto& [f, r] : pairs)
    names.push_back("loc_" + pair_tag(f, r) + "_ordinal");
  if (include_distance) names.emplace_back("rel_dist_km");
  if (include_bearing) names.emplace_back("rel_bearing_deg");
  for (const auto& [f, r] : pairs) {
    if (stats_per_pair() == 0) break;
    std::string tag = pair_tag(f, r);
    if (stat_poi) names.push_back("st_" + tag + "_poi");
    if (stat_user) names.push_back("st_" + tag + "_user");
    if (stat_checkin) names.push_back("st_" + tag + "_checkin");
    names.push_back("st_" + tag + "_seen");
  }
  return names;
}

uint64_t FeatureSpec::fingerprint() const {
  std::string canon = "featurespec.v1|";
  for (const auto& name : column_names()) {
    canon += name;
    canon += '|';
  }
  return fnv1a64(canon);
}

std::string record_cell_code(const Dataset& d, const CheckIn& r,
                             GridFamily family, int resolution) {
  if (resolution > d.anon_resolution)
    throw InvalidInputError(
        "feature resolution " + std::to_string(resolution) +
        " is finer than the anonymization grid (resolution " +
        std::to_string(d.anon_resolution) + ")");
  if (family == GridFamily::Geohash)
    return r.cell_code.substr(0, static_cast<size_t>(resolution));
  GeoPoint center = decode(d.cell_of(r)).center();
  return encode(center, family, resolution).code;
}

GridStats compute_grid_stats(const Dataset& d,
                             const std::vector<uint32_t>& train_rows,
                             GridFamily family, int resolution) {
  if (train_rows.empty())
    throw EmptyInputError("compute_grid_stats: empty training set");
  struct Acc {
    std::unordered_set<uint32_t> venues;
    std::unordered_set<uint32_t> users;
    int32_t checkins = 0;
  };
  std::unordered_map<std::string, Acc> acc;
  for (uint32_t row : train_rows) {
    const CheckIn& r = d.records[row];
    Acc& a = acc[record_cell_code(d, r, family, resolution)];
    a.venues.insert(r.venue);
    a.users.insert(r.user);
    ++a.checkins;
  }
  GridStats out;
  out.family = family;
  out.resolution = resolution;
  out.cells.reserve(acc.size());
  for (auto& [code, a] : acc)
    out.cells.emplace(code,
                      CellStats{static_cast<int32_t>(a.venues.size()),
                                static_cast<int32_t>(a.users.size()),
                                a.checkins});
  return out;
}

TrainContext build_train_context(const Dataset& d, const FeatureSpec& spec) {
  spec.ladder.validate();
  std::vector<uint32_t> train_rows;
  train_rows.reserve(d.records.size());
  for (size_t i = 0; i < d.records.size(); ++i)
    if (d.is_test.empty() || !d.is_test[i])
      train_rows.push_back(static_cast<uint32_t>(i));

  TrainContext ctx;
  ctx.train_count = train_rows.size();
  auto pairs = spec.ladder.pairs();
  ctx.stats.resize(pairs.size());
  ctx.ordinals.resize(pairs.size());
  parallel_for(pairs.size(), [&](size_t begin, size_t end) {
    for (size_t p = begin; p < end; ++p) {
      ctx.stats[p] =
          compute_grid_stats(d, train_rows, pairs[p].first, pairs[p].second);
      // dense ordinal = rank of cell code among training cells
      std::vector<std::string_view> codes;
      codes.reserve(ctx.stats[p].cells.size());
      for (const auto& [code, st] : ctx.stats[p].cells) codes.push_back(code);
      std::sort(codes.begin(), codes.end());
      auto& ord = ctx.ordinals[p];
      ord.reserve(codes.size());
      for (size_t i = 0; i < codes.size(); ++i)
        ord.emplace(std::string(codes[i]), static_cast<int32_t>(i));
    }
  });

  ctx.users.assign(d.users.size(), TrainContext::UserStats{});
  std::vector<std::array<int32_t, kNumActivities>> counts(
      d.users.size(), std::array<int32_t, kNumActivities>{});
  for (uint32_t row : train_rows) {
    const CheckIn& r = d.records[row];
    ++counts[r.user][static_cast<size_t>(r.activity)];
    ++ctx.users[r.user].checkin_count;
  }
  for (size_t u = 0; u < d.users.size(); ++u) {
    if (ctx.users[u].checkin_count == 0) continue;
    int best = 0;
    for (int c = 1; c < kNumActivities; ++c)
      if (counts[u][static_cast<size_t>(c)] >
          counts[u][static_cast<size_t>(best)])
        best = c;
    ctx.users[u].modal_activity = static_cast<int8_t>(best);
  }
  return ctx;
}

std::pair<double, double> relative_location(const CellId& cell,
                                            const GeoPoint& city_center) {
  GeoPoint c = decode(cell).center();
  if (c == city_center) return {0.0, 0.0};
  double dist = haversine_km(c, city_center);
  double bearing;
  try {
    bearing = initial_bearing_deg(c, city_center);
  } catch (const DegenerateBearingError&) {
    bearing = 0.0;
  }
  return {dist, bearing};
}

std::array<double, 5> encode_timestamp(int64_t local_epoch) {
  int64_t day = local_epoch >= 0 ? local_epoch / 86400
                                 : (local_epoch - 86399) / 86400;
  int64_t sod = local_epoch - day * 86400;
  int dow = static_cast<int>((day + 3) % 7);  // Monday = 0
  if (dow < 0) dow += 7;
  double hour_angle = kTwoPi * static_cast<double>(sod) / 86400.0;
  double dow_angle = kTwoPi * static_cast<double>(dow) / 7.0;
  return {std::sin(hour_angle), std::cos(hour_angle), std::sin(dow_angle),
          std::cos(dow_angle), dow >= 5 ? 1.0 : 0.0};
}

std::array<double, 2> encode_user(uint32_t user, const TrainContext& ctx) {
  if (user >= ctx.users.size() || ctx.users[user].checkin_count == 0)
    return {0.0, -1.0};
  const auto& u = ctx.users[user];
  return {std::log1p(static_cast<double>(u.checkin_count)),
          static_cast<double>(u.modal_activity)};
}

FeatureMatrix assemble_features(const Dataset& d, SplitFilter filter,
                                const FeatureSpec& spec,
                                const TrainContext& ctx,
                                const CityConfig& city) {
  auto pairs = spec.ladder.pairs();
  if (ctx.stats.size() != pairs.size())
    throw ContractError("TrainContext does not match FeatureSpec ladder");

  FeatureMatrix m;
  m.cols = spec.dimension();
  m.column_names = spec.column_names();
  m.spec_fingerprint = spec.fingerprint();
  for (size_t i = 0; i < d.records.size(); ++i) {
    bool test = !d.is_test.empty() && d.is_test[i];
    if (filter == SplitFilter::TrainOnly && test) continue;
    if (filter == SplitFilter::TestOnly && !test) continue;
    m.record_ids.push_back(static_cast<uint32_t>(i));
  }
  m.rows = m.record_ids.size();
  m.values.assign(m.rows * m.cols, 0.0f);
  m.labels.resize(m.rows);

  const int spp = spec.stats_per_pair();
  parallel_for(m.rows, [&](size_t begin, size_t end) {
    std::vector<std::string> codes(pairs.size());
    for (size_t out_row = begin; out_row < end; ++out_row) {
      const CheckIn& r = d.records[m.record_ids[out_row]];
      float* v = m.values.data() + out_row * m.cols;
      size_t at = 0;
      for (size_t p = 0; p < pairs.size(); ++p)
        codes[p] = record_cell_code(d, r, pairs[p].first, pairs[p].second);

      if (spec.include_user) {
        auto ue = encode_user(r.user, ctx);
        v[at++] = static_cast<float>(ue[0]);
        v[at++] = static_cast<float>(ue[1]);
      }
      if (spec.include_time) {
        auto te = encode_timestamp(r.local_epoch);
        for (double x : te) v[at++] = static_cast<float>(x);
      }
      for (size_t p = 0; p < pairs.size(); ++p) {
        auto it = ctx.ordinals[p].find(codes[p]);
        v[at++] = it == ctx.ordinals[p].end()
                      ? -1.0f
                      : static_cast<float>(it->second);
      }
      if (spec.include_distance || spec.include_bearing) {
        auto [dist, bearing] = relative_location(d.cell_of(r), city.center);
        if (spec.include_distance) v[at++] = static_cast<float>(dist);
        if (spec.include_bearing) v[at++] = static_cast<float>(bearing);
      }
      if (spp > 0) {
        for (size_t p = 0; p < pairs.size(); ++p) {
          auto it = ctx.stats[p].cells.find(codes[p]);
          const bool seen = it != ctx.stats[p].cells.end();
          const CellStats st = seen ? it->second : CellStats{};
          if (spec.stat_poi) v[at++] = static_cast<float>(st.poi_count);
          if (spec.stat_user) v[at++] = static_cast<float>(st.user_count);
          if (spec.stat_checkin) v[at++] = static_cast<float>(st.checkin_count);
          v[at++] = seen ? 1.0f : 0.0f;
        }
      }
      if (at != m.cols)
        throw ContractError("assembled vector length does not match spec");
      m.labels[out_row] = r.activity;
    }
  });
  return m;
}

void write_feature_csv(const FeatureMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write feature csv: " + path);
  out << "record_id";
  for (const auto& name : m.column_names) out << ',' << name;
  out << ",label\n";
  char buf[64];
  for (size_t i = 0; i < m.rows; ++i) {
    out << m.record_ids[i];
    const float* row = m.row(i);
    for (size_t j = 0; j < m.cols; ++j) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(row[j]));
      out << ',' << buf;
    }
    out << ',' << activity_names()[static_cast<size_t>(m.labels[i])] << '\n';
  }
  if (!out) throw IoError("failed writing feature csv: " + path);
}

}  // namespace geoact
