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

// Test-side oracles, kept independent of the library implementations they
// check.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "geoact/features.hpp"

namespace geoact::testing {

// Great-circle distance via the spherical-triangle atan2 route: a different
// algebraic path than the haversine implementation under test.
inline double oracle_great_circle_km(double lat1, double lon1, double lat2,
                                     double lon2, double radius_km = 6371.0) {
  const double d2r = 3.14159265358979323846 / 180.0;
  double p1 = lat1 * d2r, p2 = lat2 * d2r, dl = (lon2 - lon1) * d2r;
  double num = std::sqrt(std::pow(std::cos(p2) * std::sin(dl), 2) +
                         std::pow(std::cos(p1) * std::sin(p2) -
                                      std::sin(p1) * std::cos(p2) * std::cos(dl),
                                  2));
  double den =
      std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  return radius_km * std::atan2(num, den);
}

// Reference geohash built from the published per-character bit layout rather
// than a running bisection.
inline std::string oracle_geohash(double lat, double lon, int precision) {
  static const char* kAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
  std::string bits_lon, bits_lat;
  double lo = -180.0, hi = 180.0;
  for (int i = 0; i < precision * 5; ++i) {
    double mid = (lo + hi) / 2;
    if (lon >= mid) {
      bits_lon.push_back('1');
      lo = mid;
    } else {
      bits_lon.push_back('0');
      hi = mid;
    }
  }
  lo = -90.0;
  hi = 90.0;
  for (int i = 0; i < precision * 5; ++i) {
    double mid = (lo + hi) / 2;
    if (lat >= mid) {
      bits_lat.push_back('1');
      lo = mid;
    } else {
      bits_lat.push_back('0');
      hi = mid;
    }
  }
  std::string interleaved;
  for (int i = 0; i < precision * 5; ++i)
    interleaved.push_back(i % 2 == 0 ? bits_lon[i / 2] : bits_lat[i / 2]);
  std::string out;
  for (int c = 0; c < precision; ++c) {
    int v = 0;
    for (int b = 0; b < 5; ++b) v = v * 2 + (interleaved[c * 5 + b] - '0');
    out.push_back(kAlphabet[v]);
  }
  return out;
}

// Naive metric reimplementations.
inline double oracle_log_loss(const std::vector<std::array<double, 9>>& probs,
                              const std::vector<int>& labels) {
  double total = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    double p = probs[i][static_cast<size_t>(labels[i])];
    p = std::min(std::max(p, 1e-15), 1.0 - 1e-15);
    total += -std::log(p);
  }
  return total / static_cast<double>(labels.size());
}

inline double oracle_macro_f1(const std::vector<int>& preds,
                              const std::vector<int>& labels) {
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < 9; ++c) {
    long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (preds[i] == c && labels[i] == c) ++tp;
      if (preds[i] == c && labels[i] != c) ++fp;
      if (preds[i] != c && labels[i] == c) ++fn;
    }
    if (tp + fn == 0) continue;  // class absent from labels
    ++present;
    double prec = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
    double rec = double(tp) / double(tp + fn);
    sum += prec + rec > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
  }
  return present > 0 ? sum / present : 0.0;
}

// Random feature matrix with separable class clusters.
inline FeatureMatrix make_blobs(size_t n, size_t dim, int n_classes,
                                double spread, double separation,
                                uint64_t seed) {
  FeatureMatrix m;
  m.rows = n;
  m.cols = dim;
  m.values.resize(n * dim);
  m.labels.resize(n);
  m.record_ids.resize(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  std::vector<std::vector<double>> centers(static_cast<size_t>(n_classes),
                                           std::vector<double>(dim));
  std::normal_distribution<double> cdist(0.0, separation);
  for (auto& c : centers)
    for (auto& v : c) v = cdist(rng);
  for (size_t i = 0; i < n; ++i) {
    int y = static_cast<int>(i % static_cast<size_t>(n_classes));
    m.labels[i] = static_cast<int8_t>(y);
    m.record_ids[i] = static_cast<uint32_t>(i);
    for (size_t j = 0; j < dim; ++j)
      m.values[i * dim + j] = static_cast<float>(
          centers[static_cast<size_t>(y)][j] + noise(rng));
  }
  for (size_t j = 0; j < dim; ++j)
    m.column_names.push_back("x" + std::to_string(j));
  m.spec_fingerprint = 0;
  return m;
}

// Tiny in-memory city: venues on a grid, labels from venue identity.
inline Dataset make_tiny_dataset(size_t n_records, uint64_t seed) {
  Dataset d;
  d.city = "Testville";
  d.anon_resolution = 9;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dlat(35.60, 35.75);
  std::uniform_real_distribution<double> dlon(139.60, 139.80);
  std::uniform_int_distribution<int> act(0, kNumActivities - 1);
  size_t n_users = std::max<size_t>(3, n_records / 8);
  size_t n_venues = std::max<size_t>(5, n_records / 4);
  for (size_t u = 0; u < n_users; ++u) d.users.push_back("u" + std::to_string(u));
  struct V { double lat, lon; int8_t activity; };
  std::vector<V> venues;
  for (size_t v = 0; v < n_venues; ++v) {
    d.venues.push_back("v" + std::to_string(v));
    venues.push_back({dlat(rng), dlon(rng), static_cast<int8_t>(act(rng))});
  }
  std::uniform_int_distribution<size_t> upick(0, n_users - 1);
  std::uniform_int_distribution<size_t> vpick(0, n_venues - 1);
  std::uniform_int_distribution<int64_t> tpick(1333411200, 1380000000);
  for (size_t i = 0; i < n_records; ++i) {
    CheckIn r;
    r.user = static_cast<uint32_t>(upick(rng));
    r.venue = static_cast<uint32_t>(vpick(rng));
    const V& v = venues[r.venue];
    r.cell_code = encode(GeoPoint(v.lat, v.lon), GridFamily::Geohash,
                         d.anon_resolution)
                      .code;
    r.local_epoch = tpick(rng);
    r.activity = v.activity;
    d.records.push_back(std::move(r));
  }
  d.summary = d.recount();
  return d;
}

}  // namespace geoact::testing
