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

#include "geoact/models/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "geoact/metrics.hpp"

namespace geoact {

namespace {
constexpr char kMagic[8] = {'G', 'A', 'C', 'T', 'M', 'D', 'L', '1'};
}

std::string_view family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::Knn: return "knn";
    case ModelFamily::Gbt: return "gbt";
    case ModelFamily::Mlp: return "mlp";
    case ModelFamily::Rmlp: return "rmlp";
  }
  throw InvalidInputError("unknown model family");
}

ModelFamily model_family_from_name(std::string_view name) {
  if (name == "knn") return ModelFamily::Knn;
  if (name == "gbt") return ModelFamily::Gbt;
  if (name == "mlp") return ModelFamily::Mlp;
  if (name == "rmlp") return ModelFamily::Rmlp;
  throw InvalidInputError("unknown model family: " + std::string(name));
}

double ModelSpec::get(const std::string& name, double fallback) const {
  auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

double ModelSpec::require(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end())
    throw InvalidInputError("missing hyperparameter: " + name);
  return it->second;
}

Standardizer Standardizer::fit(const float* values, size_t rows, size_t cols) {
  Standardizer s;
  s.mean.assign(cols, 0.0f);
  s.inv_std.assign(cols, 1.0f);
  if (rows == 0) return s;
  std::vector<double> mean(cols, 0.0), m2(cols, 0.0);
  for (size_t i = 0; i < rows; ++i) {
    const float* row = values + i * cols;
    for (size_t j = 0; j < cols; ++j) mean[j] += row[j];
  }
  for (size_t j = 0; j < cols; ++j) mean[j] /= static_cast<double>(rows);
  for (size_t i = 0; i < rows; ++i) {
    const float* row = values + i * cols;
    for (size_t j = 0; j < cols; ++j) {
      double d = row[j] - mean[j];
      m2[j] += d * d;
    }
  }
  for (size_t j = 0; j < cols; ++j) {
    double var = m2[j] / static_cast<double>(rows);
    s.mean[j] = static_cast<float>(mean[j]);
    s.inv_std[j] = var > 0.0 ? static_cast<float>(1.0 / std::sqrt(var)) : 1.0f;
  }
  return s;
}

void Standardizer::apply(const float* in, float* out, size_t cols) const {
  for (size_t j = 0; j < cols; ++j)
    out[j] = (in[j] - mean[j]) * inv_std[j];
}

std::vector<float> Standardizer::transform(const float* values, size_t rows,
                                           size_t cols) const {
  std::vector<float> out(rows * cols);
  parallel_for(rows, [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i)
      apply(values + i * cols, out.data() + i * cols, cols);
  });
  return out;
}

std::vector<double> Classifier::predict_proba(const FeatureMatrix& m) const {
  if (m.cols != feature_dim())
    throw ContractError("feature dimension mismatch: matrix has " +
                        std::to_string(m.cols) + ", model expects " +
                        std::to_string(feature_dim()));
  if (feature_fingerprint() != 0 && m.spec_fingerprint != 0 &&
      m.spec_fingerprint != feature_fingerprint())
    throw ContractError("feature spec fingerprint mismatch");
  std::vector<double> out(m.rows * kNumActivities);
  predict_proba_rows(m.values.data(), m.rows, out.data());
  return out;
}

std::vector<int8_t> Classifier::predict(const FeatureMatrix& m) const {
  auto probs = predict_proba(m);
  std::vector<int8_t> preds(m.rows);
  for (size_t i = 0; i < m.rows; ++i)
    preds[i] = static_cast<int8_t>(argmax9(probs.data() + i * kNumActivities));
  return preds;
}

std::unique_ptr<Classifier> fit_model(const ModelSpec& spec,
                                      const FeatureMatrix& train) {
  if (train.rows == 0) throw EmptyInputError("fit_model: empty training set");
  std::unique_ptr<Classifier> model;
  switch (spec.family) {
    case ModelFamily::Knn: model = fit_knn(spec, train); break;
    case ModelFamily::Gbt: model = fit_gbt(spec, train); break;
    case ModelFamily::Mlp:
    case ModelFamily::Rmlp: model = fit_mlp(spec, train); break;
  }
  model->set_feature_fingerprint(train.spec_fingerprint);
  return model;
}

namespace detail {

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_string(std::ostream& out, std::string_view s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_f32_vec(std::ostream& out, std::span<const float> v) {
  write_u64(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
}
void write_f64_vec(std::ostream& out, std::span<const double> v) {
  write_u64(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}
void write_i8_vec(std::ostream& out, std::span<const int8_t> v) {
  write_u64(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size()));
}

namespace {
void read_raw(std::istream& in, void* dst, size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n)
    throw ParseError("truncated model file");
}
}  // namespace

uint32_t read_u32(std::istream& in) {
  uint32_t v;
  read_raw(in, &v, sizeof(v));
  return v;
}
uint64_t read_u64(std::istream& in) {
  uint64_t v;
  read_raw(in, &v, sizeof(v));
  return v;
}
double read_f64(std::istream& in) {
  double v;
  read_raw(in, &v, sizeof(v));
  return v;
}
std::string read_string(std::istream& in) {
  uint64_t n = read_u64(in);
  if (n > (1ull << 32)) throw ParseError("model string field too large");
  std::string s(n, '\0');
  read_raw(in, s.data(), n);
  return s;
}
std::vector<float> read_f32_vec(std::istream& in) {
  uint64_t n = read_u64(in);
  std::vector<float> v(n);
  read_raw(in, v.data(), n * sizeof(float));
  return v;
}
std::vector<double> read_f64_vec(std::istream& in) {
  uint64_t n = read_u64(in);
  std::vector<double> v(n);
  read_raw(in, v.data(), n * sizeof(double));
  return v;
}
std::vector<int8_t> read_i8_vec(std::istream& in) {
  uint64_t n = read_u64(in);
  std::vector<int8_t> v(n);
  read_raw(in, v.data(), n);
  return v;
}

}  // namespace detail

void save_model(const Classifier& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file: " + path);
  out.write(kMagic, sizeof(kMagic));
  detail::write_string(out, family_name(model.family()));
  detail::write_u64(out, model.feature_fingerprint());
  detail::write_u64(out, model.feature_dim());
  detail::write_u32(out, kNumActivities);
  for (const auto& name : activity_names()) detail::write_string(out, name);
  model.save_payload(out);
  if (!out) throw IoError("failed writing model file: " + path);
}

std::unique_ptr<Classifier> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) ||
      std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw ParseError("not a geoact model file: " + path);
  std::string fam = detail::read_string(in);
  uint64_t fingerprint = detail::read_u64(in);
  uint64_t dim = detail::read_u64(in);
  uint32_t n_classes = detail::read_u32(in);
  if (n_classes != kNumActivities)
    throw ParseError("model class count mismatch");
  for (uint32_t c = 0; c < n_classes; ++c) {
    if (detail::read_string(in) != activity_names()[c])
      throw ParseError("model class list mismatch");
  }
  std::unique_ptr<Classifier> model;
  ModelFamily family = model_family_from_name(fam);
  switch (family) {
    case ModelFamily::Knn: model = load_knn(in); break;
    case ModelFamily::Gbt: model = load_gbt(in); break;
    case ModelFamily::Mlp:
    case ModelFamily::Rmlp: model = load_mlp(in); break;
  }
  if (model->feature_dim() != dim)
    throw ParseError("model payload dimension mismatch");
  model->set_feature_fingerprint(fingerprint);
  return model;
}

std::vector<double> load_external_probabilities(
    const std::string& path, std::span<const uint32_t> record_ids) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open external predictions: " + path);
  std::unordered_map<uint32_t, std::vector<double>> by_id;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    uint32_t id;
    if (!(ss >> id))
      throw ParseError("external predictions line " + std::to_string(lineno) +
                       ": bad record id");
    std::vector<double> p(kNumActivities);
    double total = 0.0;
    for (int c = 0; c < kNumActivities; ++c) {
      if (!(ss >> p[static_cast<size_t>(c)]))
        throw ParseError("external predictions line " +
                         std::to_string(lineno) + ": expected 9 probabilities");
      if (p[static_cast<size_t>(c)] < 0.0)
        throw ContractError("external predictions line " +
                            std::to_string(lineno) + ": negative probability");
      total += p[static_cast<size_t>(c)];
    }
    if (std::fabs(total - 1.0) > 1e-6)
      throw ContractError("external predictions line " +
                          std::to_string(lineno) +
                          ": probabilities do not sum to 1");
    by_id[id] = std::move(p);
  }
  std::vector<double> out(record_ids.size() * kNumActivities);
  for (size_t i = 0; i < record_ids.size(); ++i) {
    auto it = by_id.find(record_ids[i]);
    if (it == by_id.end())
      throw ContractError("external predictions missing record id " +
                          std::to_string(record_ids[i]));
    std::copy(it->second.begin(), it->second.end(),
              out.begin() + static_cast<std::ptrdiff_t>(i * kNumActivities));
  }
  return out;
}

}  // namespace geoact
