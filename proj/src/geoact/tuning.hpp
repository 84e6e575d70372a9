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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoact/models/model.hpp"

namespace geoact {

struct ParamDescriptor {
  enum class Kind { Continuous, Integer, Nominal, Binary };
  Kind kind = Kind::Continuous;
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;            // positive ranges only
  std::vector<double> values;        // nominal choices

  void validate() const;
  bool contains(double v) const;
};

struct SearchSpace {
  ModelFamily family = ModelFamily::Gbt;
  std::map<std::string, ParamDescriptor> params;

  // Built-in spaces mirroring the per-family tuning tables.
  static SearchSpace defaults(ModelFamily family);

  // JSON round trip so spaces can be narrowed from a config file.
  std::string to_json() const;
  static SearchSpace from_json(const std::string& text);

  void validate() const;
};

// Each parameter draws from its own RNG stream keyed by (seed, trial, name),
// so two families sharing a parameter sample identical values trial by trial.
ModelSpec sample_config(const SearchSpace& space, uint64_t seed,
                        uint64_t trial_index);

struct TrialRecord {
  size_t index = 0;
  ModelSpec spec;
  std::vector<double> fold_losses;
  double mean_loss = 0.0;
  double std_loss = 0.0;
  double wall_seconds = 0.0;

  std::string to_json() const;
};

struct Budget {
  int max_trials = 100;
  double max_wall_seconds = 48.0 * 3600.0;
};

// Deterministic stratified fold assignment: fold_of[i] in [0, k).
std::vector<int> stratified_folds(std::span<const int8_t> labels, int k,
                                  uint64_t seed);

// Trains k models on the fold complements and reports mean +- std of the
// held-out log losses. Warnings (fold missing a class) go to warnings_out.
TrialRecord cross_validate(const ModelSpec& spec, const FeatureMatrix& data,
                           int k = 3, uint64_t fold_seed = 0,
                           std::vector<std::string>* warnings_out = nullptr);

struct SearchResult {
  TrialRecord best;
  std::vector<TrialRecord> trials;
};

// Seeded random search under a trial/wall-clock budget. initial_configs are
// evaluated first (counted against the budget) before random sampling.
// Ties on mean CV loss resolve to the earlier trial. Throws
// BudgetExhaustedError when no trial completes.
SearchResult search(const SearchSpace& space, const FeatureMatrix& data,
                    const Budget& budget, uint64_t seed,
                    const std::vector<ModelSpec>& initial_configs = {},
                    std::ostream* trial_log = nullptr, int cv_folds = 3);

}  // namespace geoact
