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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "geoact/tuning.hpp"
#include "test_support.hpp"

using namespace geoact;

TEST_CASE("nominal draws are near-uniform") {
  SearchSpace space = SearchSpace::defaults(ModelFamily::Knn);
  int l1 = 0, l2 = 0;
  for (uint64_t t = 0; t < 10000; ++t) {
    ModelSpec s = sample_config(space, 5, t);
    (s.params.at("metric") == 1.0 ? l1 : l2) += 1;
  }
  CHECK(l1 >= 4500);
  CHECK(l2 >= 4500);
}

TEST_CASE("log-uniform sampling has the closed-form median") {
  SearchSpace space = SearchSpace::defaults(ModelFamily::Gbt);
  std::vector<double> etas;
  for (uint64_t t = 0; t < 10000; ++t)
    etas.push_back(sample_config(space, 9, t).params.at("eta"));
  std::nth_element(etas.begin(), etas.begin() + 5000, etas.end());
  double median = etas[5000];
  // true median of log-uniform [1e-3, 1] is sqrt(1e-3) ~ 0.0316
  CHECK(median > 0.02);
  CHECK(median < 0.05);
}

TEST_CASE("sampling is reproducible and respects ranges") {
  for (ModelFamily family : {ModelFamily::Knn, ModelFamily::Gbt,
                             ModelFamily::Mlp, ModelFamily::Rmlp}) {
    SearchSpace space = SearchSpace::defaults(family);
    for (uint64_t t = 0; t < 200; ++t) {
      ModelSpec a = sample_config(space, 42, t);
      ModelSpec b = sample_config(space, 42, t);
      CHECK(a.params == b.params);
      CHECK(a.seed == b.seed);
      for (const auto& [name, v] : a.params)
        CHECK(space.params.at(name).contains(v));
    }
    ModelSpec c = sample_config(space, 43, 0);
    ModelSpec d = sample_config(space, 42, 0);
    CHECK(c.params != d.params);
  }
}

TEST_CASE("families sharing a parameter draw identical values per trial") {
  SearchSpace mlp = SearchSpace::defaults(ModelFamily::Mlp);
  SearchSpace rmlp = SearchSpace::defaults(ModelFamily::Rmlp);
  for (uint64_t t = 0; t < 50; ++t) {
    ModelSpec a = sample_config(mlp, 4, t);
    ModelSpec b = sample_config(rmlp, 4, t);
    CHECK(a.params.at("units") == b.params.at("units"));
    CHECK(a.params.at("hidden_layers") == b.params.at("hidden_layers"));
    CHECK(a.params.at("learning_rate") == b.params.at("learning_rate"));
  }
}

TEST_CASE("search space descriptors validate") {
  ParamDescriptor bad;
  bad.kind = ParamDescriptor::Kind::Continuous;
  bad.lo = 1.0;
  bad.hi = 0.5;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);
  ParamDescriptor log0;
  log0.kind = ParamDescriptor::Kind::Continuous;
  log0.lo = 0.0;
  log0.hi = 1.0;
  log0.log_scale = true;
  CHECK_THROWS_AS(log0.validate(), InvalidInputError);
  SearchSpace empty;
  CHECK_THROWS_AS(empty.validate(), InvalidInputError);
}

TEST_CASE("search space json round trip") {
  SearchSpace space = SearchSpace::defaults(ModelFamily::Rmlp);
  SearchSpace back = SearchSpace::from_json(space.to_json());
  CHECK(back.family == space.family);
  CHECK(back.params.size() == space.params.size());
  for (const auto& [name, d] : space.params) {
    const ParamDescriptor& b = back.params.at(name);
    CHECK(b.kind == d.kind);
    CHECK(b.lo == d.lo);
    CHECK(b.hi == d.hi);
    CHECK(b.log_scale == d.log_scale);
    CHECK(b.values == d.values);
  }
}

TEST_CASE("stratified folds are deterministic and balanced") {
  FeatureMatrix m = testing::make_blobs(270, 4, 9, 1.0, 2.0, 3);
  auto f1 = stratified_folds({m.labels.data(), m.labels.size()}, 3, 7);
  auto f2 = stratified_folds({m.labels.data(), m.labels.size()}, 3, 7);
  CHECK(f1 == f2);
  std::array<std::array<int, 3>, 9> counts{};
  for (size_t i = 0; i < m.rows; ++i)
    ++counts[size_t(m.labels[i])][size_t(f1[i])];
  for (int c = 0; c < 9; ++c) {
    int lo = *std::min_element(counts[size_t(c)].begin(),
                               counts[size_t(c)].end());
    int hi = *std::max_element(counts[size_t(c)].begin(),
                               counts[size_t(c)].end());
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("a prior-reproducing model scores ln 9 in every fold") {
  // 27 records per class; every 2/3 training portion stays perfectly
  // balanced, and k = n reproduces the fold prior of exactly 1/9
  FeatureMatrix m = testing::make_blobs(27 * 9, 3, 9, 1.0, 0.1, 8);
  ModelSpec spec;
  spec.family = ModelFamily::Knn;
  spec.params["k"] = 162;  // 2/3 of 243
  spec.params["metric"] = 2;
  TrialRecord rec = cross_validate(spec, m, 3, 5);
  REQUIRE(rec.fold_losses.size() == 3);
  for (double loss : rec.fold_losses)
    CHECK(loss == doctest::Approx(std::log(9.0)).epsilon(1e-9));
  // mean and std recompute from the folds
  double mean = (rec.fold_losses[0] + rec.fold_losses[1] + rec.fold_losses[2]) / 3.0;
  CHECK(rec.mean_loss == doctest::Approx(mean).epsilon(1e-15));
  double ss = 0;
  for (double l : rec.fold_losses) ss += (l - mean) * (l - mean);
  CHECK(rec.std_loss == doctest::Approx(std::sqrt(ss / 3.0)).epsilon(1e-12));
}

TEST_CASE("near-perfect probabilities give near-zero CV loss") {
  FeatureMatrix m = testing::make_blobs(180, 4, 3, 0.1, 30.0, 12);
  ModelSpec spec;
  spec.family = ModelFamily::Knn;
  spec.params["k"] = 3;
  spec.params["metric"] = 2;
  TrialRecord rec = cross_validate(spec, m, 3, 5);
  CHECK(rec.mean_loss < 1e-6);
}

TEST_CASE("fold degeneracy warns but still scores") {
  // one class with only 2 records cannot reach all 3 folds
  FeatureMatrix m = testing::make_blobs(90, 3, 2, 0.5, 5.0, 17);
  m.labels[0] = 8;
  m.labels[1] = 8;
  for (size_t i = 2; i < m.rows; ++i) m.labels[i] = int8_t(i % 2);
  ModelSpec spec;
  spec.family = ModelFamily::Knn;
  spec.params["k"] = 3;
  spec.params["metric"] = 2;
  std::vector<std::string> warnings;
  TrialRecord rec = cross_validate(spec, m, 3, 5, &warnings);
  CHECK(!warnings.empty());
  CHECK(rec.fold_losses.size() == 3);
  for (double l : rec.fold_losses) CHECK(std::isfinite(l));
}

TEST_CASE("search returns the planted optimal configuration") {
  // classes sit in tight, far-apart triples: k <= 3 is perfect and k = 1 is
  // planted; any tie on loss resolves to the earlier (planted) trial
  FeatureMatrix m;
  m.cols = 2;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> jitter(0.0, 1e-4);
  size_t n = 0;
  for (int c = 0; c < 9; ++c) {
    for (int rep = 0; rep < 6; ++rep) {
      m.values.push_back(float(10.0 * c + jitter(rng)));
      m.values.push_back(float(-7.0 * c + jitter(rng)));
      m.labels.push_back(int8_t(c));
      m.record_ids.push_back(uint32_t(n++));
    }
  }
  m.rows = n;
  m.column_names = {"x", "y"};

  ModelSpec planted;
  planted.family = ModelFamily::Knn;
  planted.params["k"] = 1;
  planted.params["metric"] = 2;
  planted.seed = 0;

  SearchSpace space = SearchSpace::defaults(ModelFamily::Knn);
  std::ostringstream log;
  SearchResult result = search(space, m, Budget{6, 3600.0}, 21, {planted},
                               &log, 3);
  CHECK(result.best.index == 0);
  CHECK(result.best.spec.params.at("k") == 1.0);
  CHECK(result.trials.size() == 6);

  // running best is non-increasing
  double best = result.trials[0].mean_loss;
  for (const auto& t : result.trials) {
    best = std::min(best, t.mean_loss);
    CHECK(best <= t.mean_loss + 1e-15);
  }
  // the trial log is one JSON object per line
  std::string line;
  size_t lines = 0;
  std::istringstream in(log.str());
  while (std::getline(in, line)) {
    CHECK(line.find("\"mean_loss\"") != std::string::npos);
    ++lines;
  }
  CHECK(lines == 6);
}

TEST_CASE("a single-trial budget returns that trial") {
  FeatureMatrix m = testing::make_blobs(90, 3, 3, 1.0, 2.0, 30);
  SearchSpace space = SearchSpace::defaults(ModelFamily::Knn);
  SearchResult result = search(space, m, Budget{1, 3600.0}, 3);
  CHECK(result.trials.size() == 1);
  CHECK(result.best.index == 0);
}

TEST_CASE("an empty budget is an error") {
  FeatureMatrix m = testing::make_blobs(90, 3, 3, 1.0, 2.0, 31);
  SearchSpace space = SearchSpace::defaults(ModelFamily::Knn);
  CHECK_THROWS_AS(search(space, m, Budget{100, 0.0}, 3),
                  BudgetExhaustedError);
  CHECK_THROWS_AS(search(space, m, Budget{0, 0.0}, 3), BudgetExhaustedError);
}

TEST_CASE("search runs are reproducible end to end") {
  FeatureMatrix m = testing::make_blobs(120, 4, 4, 1.0, 2.5, 33);
  SearchSpace space = SearchSpace::defaults(ModelFamily::Knn);
  SearchResult a = search(space, m, Budget{5, 3600.0}, 77);
  SearchResult b = search(space, m, Budget{5, 3600.0}, 77);
  REQUIRE(a.trials.size() == b.trials.size());
  for (size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(a.trials[i].spec.params == b.trials[i].spec.params);
    CHECK(a.trials[i].fold_losses == b.trials[i].fold_losses);
  }
  CHECK(a.best.index == b.best.index);
}
