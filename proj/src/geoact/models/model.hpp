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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "geoact/features.hpp"

namespace geoact {

enum class ModelFamily : uint8_t { Knn, Gbt, Mlp, Rmlp };

std::string_view family_name(ModelFamily f);
ModelFamily model_family_from_name(std::string_view name);

// Classifier family + hyperparameters. All hyperparameters are numeric; the
// k-NN metric is encoded as 1 (L1) or 2 (L2), binary flags as 0/1.
struct ModelSpec {
  ModelFamily family = ModelFamily::Gbt;
  std::map<std::string, double> params;
  uint64_t seed = 0;

  double get(const std::string& name, double fallback) const;
  double require(const std::string& name) const;
  bool has(const std::string& name) const { return params.count(name) > 0; }
};

// Column-wise affine normalization fitted on training data. Zero-variance
// columns pass through unscaled.
struct Standardizer {
  std::vector<float> mean;
  std::vector<float> inv_std;

  static Standardizer fit(const float* values, size_t rows, size_t cols);
  void apply(const float* in, float* out, size_t cols) const;
  std::vector<float> transform(const float* values, size_t rows,
                               size_t cols) const;
};

// A fitted predictor producing probability vectors over the nine activities.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual ModelFamily family() const = 0;
  virtual size_t feature_dim() const = 0;

  uint64_t feature_fingerprint() const { return fingerprint_; }
  void set_feature_fingerprint(uint64_t fp) { fingerprint_ = fp; }

  // Raw batch interface; rows is [n x feature_dim], out is [n x 9].
  virtual void predict_proba_rows(const float* rows, size_t n,
                                  double* out) const = 0;

  // Fingerprint-checked batch prediction.
  std::vector<double> predict_proba(const FeatureMatrix& m) const;
  std::vector<int8_t> predict(const FeatureMatrix& m) const;

  virtual void save_payload(std::ostream& out) const = 0;

 private:
  uint64_t fingerprint_ = 0;
};

// Dispatch on ModelSpec.family. Throws InvalidInputError for bad
// hyperparameters and TrainingDivergedError when optimization blows up.
std::unique_ptr<Classifier> fit_model(const ModelSpec& spec,
                                      const FeatureMatrix& train);

// Versioned self-describing binary container. Prediction on a matrix whose
// feature fingerprint differs from the stored one is refused.
void save_model(const Classifier& model, const std::string& path);
std::unique_ptr<Classifier> load_model(const std::string& path);

// External-model bridge: line-delimited "record_id <tab> p1 .. <tab> p9",
// validated to the simplex. Returns probabilities row-aligned to record_ids.
std::vector<double> load_external_probabilities(
    const std::string& path, std::span<const uint32_t> record_ids);

// Registered by each family implementation (knn/gbt/mlp).
using ModelLoader = std::unique_ptr<Classifier> (*)(std::istream&);
namespace detail {
void write_u32(std::ostream& out, uint32_t v);
void write_u64(std::ostream& out, uint64_t v);
void write_f64(std::ostream& out, double v);
void write_string(std::ostream& out, std::string_view s);
void write_f32_vec(std::ostream& out, std::span<const float> v);
void write_f64_vec(std::ostream& out, std::span<const double> v);
void write_i8_vec(std::ostream& out, std::span<const int8_t> v);
uint32_t read_u32(std::istream& in);
uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);
std::vector<float> read_f32_vec(std::istream& in);
std::vector<double> read_f64_vec(std::istream& in);
std::vector<int8_t> read_i8_vec(std::istream& in);
}  // namespace detail

std::unique_ptr<Classifier> fit_knn(const ModelSpec& spec,
                                    const FeatureMatrix& train);
std::unique_ptr<Classifier> fit_gbt(const ModelSpec& spec,
                                    const FeatureMatrix& train);
std::unique_ptr<Classifier> fit_mlp(const ModelSpec& spec,
                                    const FeatureMatrix& train);
std::unique_ptr<Classifier> load_knn(std::istream& in);
std::unique_ptr<Classifier> load_gbt(std::istream& in);
std::unique_ptr<Classifier> load_mlp(std::istream& in);

}  // namespace geoact
