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

#include <vector>

#include "geoact/models/model.hpp"

namespace geoact {

struct MlpArchitecture {
  size_t input_dim = 0;
  int hidden_layers = 3;
  int units = 128;
  bool batch_norm = false;
  bool skip_concat = false;
  double noise_stddev = 0.0;
  double dropout_rate = 0.0;

  size_t block_input_dim(int block) const;
  size_t final_dim() const;
};

// Feed-forward net in double precision. The hidden block is
//   dense -> relu [-> gaussian noise -> batch norm -> dropout]
// optionally concatenated with the block input. Parameters live in one
// contiguous vector so snapshots, averaging and gradient checks stay simple.
class MlpNetwork {
 public:
  MlpNetwork() = default;
  MlpNetwork(const MlpArchitecture& arch, uint64_t init_seed);

  const MlpArchitecture& arch() const { return arch_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<uint8_t>& is_weight() const { return is_weight_; }
  std::vector<double>& running_mean() { return running_mean_; }
  std::vector<double>& running_var() { return running_var_; }
  const std::vector<double>& running_mean() const { return running_mean_; }
  const std::vector<double>& running_var() const { return running_var_; }

  // Train-mode forward/backward over one batch. x is [batch x input_dim]
  // row-major, grads matches params() layout. Returns the mean log loss.
  // Noise and dropout draws are functions of noise_seed only.
  double train_batch(const double* x, const int8_t* y, size_t batch,
                     std::vector<double>& grads, uint64_t noise_seed,
                     bool update_running);

  // Inference-mode probabilities (running batch-norm statistics, no noise,
  // no dropout); probs is [n x 9].
  void forward_inference(const double* x, size_t n, double* probs) const;

  // Recomputes batch-norm running statistics under the current parameters
  // with one train-mode pass (noise and dropout off).
  void refresh_running_stats(const double* x, size_t n, size_t batch);

  // Smallest |pre-activation| seen in the last train_batch call. Finite
  // differencing across a relu kink is invalid; gradient checks use this to
  // pick a kink-free evaluation point.
  double min_abs_preactivation() const;

 private:
  struct Layout {
    size_t w = 0, b = 0, gamma = 0, beta = 0;  // offsets into params_
    size_t in_dim = 0, out_dim = 0;
  };

  void forward_train(const double* x, size_t batch, uint64_t noise_seed,
                     bool update_running, bool stochastic);

  MlpArchitecture arch_;
  std::vector<Layout> layers_;  // hidden blocks + output layer at back
  std::vector<double> params_;
  std::vector<uint8_t> is_weight_;
  std::vector<double> running_mean_;  // hidden_layers x units
  std::vector<double> running_var_;
  uint64_t bn_batches_seen_ = 0;

  // batch scratch, indexed per block
  struct Scratch {
    std::vector<double> x;      // block input
    std::vector<double> z;      // pre-activation
    std::vector<double> a;      // post-relu (+ noise)
    std::vector<double> xhat;   // normalized
    std::vector<double> y;      // block output before concat
    std::vector<double> mask;   // dropout mask (scaled)
    std::vector<double> mu, var;
  };
  std::vector<Scratch> scratch_;
  std::vector<double> final_x_, logits_, probs_;

  friend class MlpModel;
  friend std::unique_ptr<Classifier> fit_mlp(const ModelSpec&,
                                             const FeatureMatrix&);
  friend std::unique_ptr<Classifier> load_mlp(std::istream&);
};

struct MlpTrainReport {
  int epochs_run = 0;
  double best_val_loss = 0.0;
  bool used_swa_average = false;
};

class MlpModel : public Classifier {
 public:
  ModelFamily family() const override { return family_; }
  size_t feature_dim() const override { return arch_input_dim_; }
  void predict_proba_rows(const float* rows, size_t n,
                          double* out) const override;
  void save_payload(std::ostream& out) const override;
  static std::unique_ptr<Classifier> load(std::istream& in);

  const MlpTrainReport& train_report() const { return report_; }
  const std::vector<double>& epoch_val_losses() const { return val_losses_; }

 private:
  friend std::unique_ptr<Classifier> fit_mlp(const ModelSpec&,
                                             const FeatureMatrix&);
  ModelFamily family_ = ModelFamily::Mlp;
  size_t arch_input_dim_ = 0;
  Standardizer std_;
  MlpNetwork net_;
  MlpTrainReport report_;
  std::vector<double> val_losses_;
};

}  // namespace geoact
