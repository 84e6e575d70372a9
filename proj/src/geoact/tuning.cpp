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

#include "geoact/tuning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <random>

#include <nlohmann/json.hpp>

#include "geoact/metrics.hpp"

namespace geoact {

namespace {
using json = nlohmann::json;

const char* kind_name(ParamDescriptor::Kind k) {
  switch (k) {
    case ParamDescriptor::Kind::Continuous: return "continuous";
    case ParamDescriptor::Kind::Integer: return "integer";
    case ParamDescriptor::Kind::Nominal: return "nominal";
    case ParamDescriptor::Kind::Binary: return "binary";
  }
  return "?";
}

ParamDescriptor::Kind kind_from_name(const std::string& s) {
  if (s == "continuous") return ParamDescriptor::Kind::Continuous;
  if (s == "integer") return ParamDescriptor::Kind::Integer;
  if (s == "nominal") return ParamDescriptor::Kind::Nominal;
  if (s == "binary") return ParamDescriptor::Kind::Binary;
  throw ParseError("unknown search-space parameter kind: " + s);
}

ParamDescriptor continuous(double lo, double hi, bool log_scale) {
  ParamDescriptor d;
  d.kind = ParamDescriptor::Kind::Continuous;
  d.lo = lo;
  d.hi = hi;
  d.log_scale = log_scale;
  return d;
}

ParamDescriptor integer(double lo, double hi) {
  ParamDescriptor d;
  d.kind = ParamDescriptor::Kind::Integer;
  d.lo = lo;
  d.hi = hi;
  return d;
}

ParamDescriptor nominal(std::vector<double> values) {
  ParamDescriptor d;
  d.kind = ParamDescriptor::Kind::Nominal;
  d.values = std::move(values);
  return d;
}

ParamDescriptor binary() {
  ParamDescriptor d;
  d.kind = ParamDescriptor::Kind::Binary;
  return d;
}

}  // namespace

void ParamDescriptor::validate() const {
  switch (kind) {
    case Kind::Continuous:
    case Kind::Integer:
      if (!(lo < hi))
        throw InvalidInputError("search space: lo must be < hi");
      if (log_scale && !(lo > 0.0))
        throw InvalidInputError("search space: log scale needs positive lo");
      break;
    case Kind::Nominal:
      if (values.empty())
        throw InvalidInputError("search space: nominal with no values");
      break;
    case Kind::Binary:
      break;
  }
}

bool ParamDescriptor::contains(double v) const {
  switch (kind) {
    case Kind::Continuous: return v >= lo && v <= hi;
    case Kind::Integer:
      return v >= lo && v <= hi && v == std::floor(v);
    case Kind::Nominal:
      return std::find(values.begin(), values.end(), v) != values.end();
    case Kind::Binary: return v == 0.0 || v == 1.0;
  }
  return false;
}

SearchSpace SearchSpace::defaults(ModelFamily family) {
  SearchSpace s;
  s.family = family;
  switch (family) {
    case ModelFamily::Knn:
      s.params["k"] = integer(1, 33);
      s.params["metric"] = nominal({1, 2});  // L1 / L2
      break;
    case ModelFamily::Gbt:
      s.params["eta"] = continuous(1e-3, 1.0, true);
      s.params["lambda"] = continuous(1e-10, 1.0, true);
      s.params["alpha"] = continuous(1e-10, 1.0, true);
      s.params["gamma"] = continuous(1e-1, 1.0, true);
      s.params["num_round"] = integer(1, 100);
      s.params["max_depth"] = integer(1, 20);
      s.params["max_delta_step"] = integer(0, 10);
      s.params["min_child_weight"] = continuous(0.1, 20.0, true);
      s.params["subsample"] = continuous(0.01, 1.0, false);
      s.params["colsample_bylevel"] = continuous(0.1, 1.0, false);
      s.params["colsample_bynode"] = continuous(0.1, 1.0, false);
      s.params["colsample_bytree"] = continuous(0.5, 1.0, false);
      break;
    case ModelFamily::Mlp:
      s.params["hidden_layers"] = nominal({3, 6, 9});
      s.params["units"] = nominal({128, 256, 512});
      s.params["learning_rate"] = continuous(1e-3, 1e-1, true);
      break;
    case ModelFamily::Rmlp:
      s.params["hidden_layers"] = nominal({3, 6, 9});
      s.params["units"] = nominal({128, 256, 512});
      s.params["learning_rate"] = continuous(1e-3, 1e-1, true);
      s.params["dropout_rate"] = continuous(0.0, 0.5, false);
      s.params["weight_decay"] = continuous(1e-6, 1e-1, true);
      // linear, not log: the range legitimately includes zero noise
      s.params["stddev"] = continuous(0.0, 0.5, false);
      s.params["sc"] = binary();
      s.params["swa"] = binary();
      break;
  }
  return s;
}

void SearchSpace::validate() const {
  if (params.empty()) throw InvalidInputError("search space has no parameters");
  for (const auto& [name, d] : params) d.validate();
}

std::string SearchSpace::to_json() const {
  json j;
  j["family"] = std::string(family_name(family));
  json ps;
  for (const auto& [name, d] : params) {
    json pd;
    pd["kind"] = kind_name(d.kind);
    if (d.kind == ParamDescriptor::Kind::Nominal) {
      pd["values"] = d.values;
    } else if (d.kind != ParamDescriptor::Kind::Binary) {
      pd["lo"] = d.lo;
      pd["hi"] = d.hi;
      pd["log_scale"] = d.log_scale;
    }
    ps[name] = pd;
  }
  j["params"] = ps;
  return j.dump(2) + "\n";
}

SearchSpace SearchSpace::from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("search space is not valid JSON");
  SearchSpace s;
  s.family = model_family_from_name(j.at("family").get<std::string>());
  for (const auto& [name, pd] : j.at("params").items()) {
    ParamDescriptor d;
    d.kind = kind_from_name(pd.at("kind").get<std::string>());
    if (d.kind == ParamDescriptor::Kind::Nominal) {
      d.values = pd.at("values").get<std::vector<double>>();
    } else if (d.kind != ParamDescriptor::Kind::Binary) {
      d.lo = pd.at("lo").get<double>();
      d.hi = pd.at("hi").get<double>();
      d.log_scale = pd.value("log_scale", false);
    }
    s.params[name] = d;
  }
  s.validate();
  return s;
}

ModelSpec sample_config(const SearchSpace& space, uint64_t seed,
                        uint64_t trial_index) {
  space.validate();
  ModelSpec spec;
  spec.family = space.family;
  spec.seed = mix_seed(seed, trial_index, 0x5eedull);
  for (const auto& [name, d] : space.params) {
    std::mt19937_64 rng(mix_seed(seed, trial_index, fnv1a64(name)));
    double v = 0.0;
    switch (d.kind) {
      case ParamDescriptor::Kind::Continuous: {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double t = u(rng);
        v = d.log_scale
                ? std::exp(std::log(d.lo) + t * (std::log(d.hi) - std::log(d.lo)))
                : d.lo + t * (d.hi - d.lo);
        break;
      }
      case ParamDescriptor::Kind::Integer: {
        std::uniform_int_distribution<long long> u(
            static_cast<long long>(d.lo), static_cast<long long>(d.hi));
        v = static_cast<double>(u(rng));
        break;
      }
      case ParamDescriptor::Kind::Nominal: {
        std::uniform_int_distribution<size_t> u(0, d.values.size() - 1);
        v = d.values[u(rng)];
        break;
      }
      case ParamDescriptor::Kind::Binary: {
        std::uniform_int_distribution<int> u(0, 1);
        v = static_cast<double>(u(rng));
        break;
      }
    }
    if (!d.contains(v))
      throw ContractError("sampled value out of range for " + name);
    spec.params[name] = v;
  }
  return spec;
}

std::vector<int> stratified_folds(std::span<const int8_t> labels, int k,
                                  uint64_t seed) {
  if (k < 2) throw InvalidInputError("cross validation needs k >= 2");
  std::vector<int> fold_of(labels.size(), -1);
  std::array<std::vector<uint32_t>, kNumActivities> by_class;
  for (size_t i = 0; i < labels.size(); ++i)
    by_class[static_cast<size_t>(labels[i])].push_back(
        static_cast<uint32_t>(i));
  for (int c = 0; c < kNumActivities; ++c) {
    auto& idx = by_class[static_cast<size_t>(c)];
    if (idx.empty()) continue;
    std::mt19937_64 rng(mix_seed(seed, 7000 + c));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (size_t i = 0; i < idx.size(); ++i)
      fold_of[idx[i]] = static_cast<int>(i % static_cast<size_t>(k));
  }
  return fold_of;
}

TrialRecord cross_validate(const ModelSpec& spec, const FeatureMatrix& data,
                           int k, uint64_t fold_seed,
                           std::vector<std::string>* warnings_out) {
  if (data.rows < static_cast<size_t>(2 * k))
    throw InvalidInputError("cross_validate: too few rows");
  auto fold_of = stratified_folds(
      std::span<const int8_t>(data.labels.data(), data.labels.size()), k,
      fold_seed);

  TrialRecord rec;
  rec.spec = spec;
  auto t0 = std::chrono::steady_clock::now();
  for (int fold = 0; fold < k; ++fold) {
    FeatureMatrix tr, va;
    tr.cols = va.cols = data.cols;
    tr.column_names = va.column_names = data.column_names;
    tr.spec_fingerprint = va.spec_fingerprint = data.spec_fingerprint;
    for (size_t i = 0; i < data.rows; ++i) {
      FeatureMatrix& dst = fold_of[i] == fold ? va : tr;
      dst.values.insert(dst.values.end(), data.row(i), data.row(i) + data.cols);
      dst.labels.push_back(data.labels[i]);
      dst.record_ids.push_back(data.record_ids.empty()
                                   ? static_cast<uint32_t>(i)
                                   : data.record_ids[i]);
      ++dst.rows;
    }
    std::array<bool, kNumActivities> present{};
    for (int8_t y : va.labels) present[static_cast<size_t>(y)] = true;
    for (int c = 0; c < kNumActivities; ++c) {
      bool in_data = false;
      for (int8_t y : data.labels)
        if (y == c) { in_data = true; break; }
      if (in_data && !present[static_cast<size_t>(c)] && warnings_out)
        warnings_out->push_back("fold " + std::to_string(fold) +
                                " is missing class " +
                                std::string(activity_names()[c]));
    }
    auto model = fit_model(spec, tr);
    auto probs = model->predict_proba(va);
    rec.fold_losses.push_back(log_loss(
        probs, std::span<const int8_t>(va.labels.data(), va.labels.size())));
  }
  auto t1 = std::chrono::steady_clock::now();
  rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

  double sum = 0.0;
  for (double l : rec.fold_losses) sum += l;
  rec.mean_loss = sum / static_cast<double>(rec.fold_losses.size());
  double ss = 0.0;
  for (double l : rec.fold_losses) ss += (l - rec.mean_loss) * (l - rec.mean_loss);
  rec.std_loss = std::sqrt(ss / static_cast<double>(rec.fold_losses.size()));
  return rec;
}

std::string TrialRecord::to_json() const {
  json j;
  j["trial"] = index;
  j["family"] = std::string(family_name(spec.family));
  j["seed"] = spec.seed;
  json cfg;
  for (const auto& [name, v] : spec.params) cfg[name] = v;
  j["config"] = cfg;
  j["fold_losses"] = fold_losses;
  j["mean_loss"] = mean_loss;
  j["std_loss"] = std_loss;
  j["wall_seconds"] = wall_seconds;
  return j.dump();
}

SearchResult search(const SearchSpace& space, const FeatureMatrix& data,
                    const Budget& budget, uint64_t seed,
                    const std::vector<ModelSpec>& initial_configs,
                    std::ostream* trial_log, int cv_folds) {
  space.validate();
  if (budget.max_trials <= 0 && budget.max_wall_seconds <= 0.0)
    throw BudgetExhaustedError("tuning budget admits no trials");

  SearchResult result;
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  size_t trial = 0;
  std::optional<size_t> best;
  while (true) {
    if (budget.max_trials > 0 &&
        trial >= static_cast<size_t>(budget.max_trials))
      break;
    if (elapsed() >= budget.max_wall_seconds) break;
    ModelSpec spec = trial < initial_configs.size()
                         ? initial_configs[trial]
                         : sample_config(space, seed, trial);
    std::vector<std::string> warnings;
    TrialRecord rec = cross_validate(spec, data, cv_folds,
                                     mix_seed(seed, 0xf01d5), &warnings);
    rec.index = trial;
    for (const auto& w : warnings) std::cerr << "[tuning] warning: " << w << "\n";
    if (trial_log) {
      *trial_log << rec.to_json() << "\n";
      trial_log->flush();
    }
    result.trials.push_back(std::move(rec));
    if (!best || result.trials[trial].mean_loss <
                     result.trials[*best].mean_loss)
      best = trial;
    ++trial;
  }
  if (result.trials.empty())
    throw BudgetExhaustedError("tuning budget exhausted before any trial ran");
  result.best = result.trials[*best];
  return result;
}

}  // namespace geoact
