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

#include "geoact/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace geoact {

int argmax9(const double* probs) {
  int best = 0;
  for (int c = 1; c < kNumActivities; ++c)
    if (probs[c] > probs[best]) best = c;
  return best;
}

double log_loss(std::span<const double> probs,
                std::span<const int8_t> labels) {
  if (labels.empty()) throw ContractError("log_loss: empty input");
  if (probs.size() != labels.size() * static_cast<size_t>(kNumActivities))
    throw ContractError("log_loss: probs/labels length mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const double* row = probs.data() + i * kNumActivities;
    double total = 0.0;
    for (int c = 0; c < kNumActivities; ++c) {
      if (!(row[c] >= 0.0))
        throw ContractError("log_loss: negative or NaN probability");
      total += row[c];
    }
    if (std::fabs(total - 1.0) > 1e-6)
      throw ContractError("log_loss: probabilities do not sum to 1");
    int8_t y = labels[i];
    if (y < 0 || y >= kNumActivities)
      throw ContractError("log_loss: label out of range");
    double p = row[y];
    if (p < kLogLossClip) p = kLogLossClip;
    if (p > 1.0 - kLogLossClip) p = 1.0 - kLogLossClip;
    sum -= std::log(p);
  }
  return sum / static_cast<double>(labels.size());
}

MacroF1Result macro_f1(std::span<const int8_t> preds,
                       std::span<const int8_t> labels) {
  if (labels.empty()) throw ContractError("macro_f1: empty input");
  if (preds.size() != labels.size())
    throw ContractError("macro_f1: preds/labels length mismatch");
  std::array<uint64_t, kNumActivities> tp{}, fp{}, fn{};
  for (size_t i = 0; i < labels.size(); ++i) {
    int8_t y = labels[i], p = preds[i];
    if (y < 0 || y >= kNumActivities || p < 0 || p >= kNumActivities)
      throw ContractError("macro_f1: class index out of range");
    if (p == y) {
      ++tp[static_cast<size_t>(y)];
    } else {
      ++fp[static_cast<size_t>(p)];
      ++fn[static_cast<size_t>(y)];
    }
  }
  MacroF1Result out;
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < kNumActivities; ++c) {
    size_t ci = static_cast<size_t>(c);
    PerClassF1& pc = out.per_class[ci];
    pc.support = tp[ci] + fn[ci];
    uint64_t predicted = tp[ci] + fp[ci];
    pc.precision = predicted > 0
                       ? static_cast<double>(tp[ci]) / static_cast<double>(predicted)
                       : 0.0;
    pc.recall = pc.support > 0
                    ? static_cast<double>(tp[ci]) / static_cast<double>(pc.support)
                    : 0.0;
    double denom = pc.precision + pc.recall;
    pc.f1 = denom > 0.0 ? 2.0 * pc.precision * pc.recall / denom : 0.0;
    if (pc.support > 0) {
      sum += pc.f1;
      ++present;
    }
  }
  out.macro_f1 = present > 0 ? sum / present : 0.0;
  return out;
}

ConfusionMatrix confusion(std::span<const int8_t> preds,
                          std::span<const int8_t> labels) {
  if (preds.size() != labels.size())
    throw ContractError("confusion: preds/labels length mismatch");
  ConfusionMatrix cm;
  for (size_t i = 0; i < labels.size(); ++i) {
    ++cm.counts[static_cast<size_t>(labels[i])][static_cast<size_t>(preds[i])];
    ++cm.total;
  }
  return cm;
}

std::array<std::array<double, kNumActivities>, kNumActivities>
ConfusionMatrix::normalized() const {
  std::array<std::array<double, kNumActivities>, kNumActivities> out{};
  for (int i = 0; i < kNumActivities; ++i) {
    uint64_t row_total = 0;
    for (int j = 0; j < kNumActivities; ++j)
      row_total += counts[static_cast<size_t>(i)][static_cast<size_t>(j)];
    if (row_total == 0) continue;
    for (int j = 0; j < kNumActivities; ++j)
      out[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          static_cast<double>(counts[static_cast<size_t>(i)][static_cast<size_t>(j)]) /
          static_cast<double>(row_total);
  }
  return out;
}

std::array<bool, kNumActivities> ConfusionMatrix::zero_support_rows() const {
  std::array<bool, kNumActivities> out{};
  for (int i = 0; i < kNumActivities; ++i) {
    uint64_t row_total = 0;
    for (int j = 0; j < kNumActivities; ++j)
      row_total += counts[static_cast<size_t>(i)][static_cast<size_t>(j)];
    out[static_cast<size_t>(i)] = row_total == 0;
  }
  return out;
}

MetricsReport evaluate_predictions(std::span<const double> probs,
                                   std::span<const int8_t> labels) {
  MetricsReport rep;
  rep.n = labels.size();
  rep.logloss = log_loss(probs, labels);
  std::vector<int8_t> preds(labels.size());
  for (size_t i = 0; i < labels.size(); ++i)
    preds[i] = static_cast<int8_t>(argmax9(probs.data() + i * kNumActivities));
  rep.f1 = macro_f1(preds, labels);
  return rep;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  char hash_buf[17];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(config_hash));
  j["model_family"] = model_family;
  j["split"] = split;
  j["n"] = n;
  j["feature_dim"] = feature_dim;
  j["log_loss"] = logloss;
  j["macro_f1"] = f1.macro_f1;
  j["config_hash"] = hash_buf;
  j["seed"] = seed;
  j["earth_radius_km"] = kDefaultEarthRadiusKm;
  nlohmann::json per;
  for (int c = 0; c < kNumActivities; ++c) {
    const auto& pc = f1.per_class[static_cast<size_t>(c)];
    per[activity_names()[static_cast<size_t>(c)]] = {
        {"precision", pc.precision},
        {"recall", pc.recall},
        {"f1", pc.f1},
        {"support", pc.support}};
  }
  j["per_class"] = per;
  return j.dump(2) + "\n";
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path,
                         bool normalized) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write confusion csv: " + path);
  out << "true\\pred";
  for (const auto& name : activity_names()) out << ',' << '"' << name << '"';
  out << '\n';
  auto norm = cm.normalized();
  auto zero = cm.zero_support_rows();
  char buf[64];
  for (int i = 0; i < kNumActivities; ++i) {
    out << '"' << activity_names()[static_cast<size_t>(i)] << '"';
    for (int j = 0; j < kNumActivities; ++j) {
      if (normalized) {
        if (zero[static_cast<size_t>(i)]) {
          out << ",na";
        } else {
          std::snprintf(buf, sizeof(buf), "%.6f",
                        norm[static_cast<size_t>(i)][static_cast<size_t>(j)]);
          out << ',' << buf;
        }
      } else {
        out << ',' << cm.counts[static_cast<size_t>(i)][static_cast<size_t>(j)];
      }
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing confusion csv: " + path);
}

}  // namespace geoact
