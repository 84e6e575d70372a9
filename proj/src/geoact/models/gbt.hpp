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

#include <array>
#include <vector>

#include "geoact/models/model.hpp"

namespace geoact {

struct GbtParams {
  double eta = 0.3;
  double reg_lambda = 1.0;
  double reg_alpha = 0.0;
  double gamma = 0.0;
  int num_round = 50;
  int max_depth = 6;
  int max_delta_step = 0;
  double min_child_weight = 1.0;
  double subsample = 1.0;
  double colsample_bytree = 1.0;
  double colsample_bylevel = 1.0;
  double colsample_bynode = 1.0;
  uint64_t seed = 0;

  static GbtParams from_spec(const ModelSpec& spec);
  void validate() const;
};

struct GbtTreeNode {
  int32_t feature = -1;  // -1 for leaves
  float threshold = 0.0f;
  int32_t left = -1;
  int32_t right = -1;
  double leaf = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct GbtTree {
  std::vector<GbtTreeNode> nodes;

  double leaf_at(const float* row) const {
    int32_t id = 0;
    while (!nodes[static_cast<size_t>(id)].is_leaf()) {
      const GbtTreeNode& n = nodes[static_cast<size_t>(id)];
      id = row[n.feature] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<size_t>(id)].leaf;
  }
};

// One-vs-all softmax gradient boosting with second-order (Newton) leaf
// weights. With zero rounds the raw scores are the log-prior initialization
// and predict_proba reproduces the empirical class priors.
class GbtModel : public Classifier {
 public:
  ModelFamily family() const override { return ModelFamily::Gbt; }
  size_t feature_dim() const override { return dim_; }
  void predict_proba_rows(const float* rows, size_t n,
                          double* out) const override;
  void save_payload(std::ostream& out) const override;
  static std::unique_ptr<Classifier> load(std::istream& in);

  // Raw (pre-softmax) scores incl. the log-prior base.
  void raw_scores(const float* row, double* out9) const;

  int rounds() const { return rounds_; }
  double eta() const { return eta_; }
  const std::vector<GbtTree>& trees() const { return trees_; }
  // Mean training log loss after each boosting round; loss_history()[0] is
  // the prior-only loss.
  const std::vector<double>& loss_history() const { return loss_history_; }

 private:
  friend std::unique_ptr<Classifier> fit_gbt(const ModelSpec&,
                                             const FeatureMatrix&);
  size_t dim_ = 0;
  int rounds_ = 0;
  double eta_ = 0.3;
  std::array<double, kNumActivities> priors_{};
  std::array<double, kNumActivities> base_score_{};
  std::vector<GbtTree> trees_;  // tree (round m, class c) at m * 9 + c
  std::vector<double> loss_history_;
};

}  // namespace geoact
