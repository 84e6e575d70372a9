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

#include "geoact/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "geoact/kernels/kernels.hpp"
#include "geoact/metrics.hpp"

namespace geoact {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.9;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void add_bias(double* z, const double* b, size_t batch, size_t dim) {
  for (size_t i = 0; i < batch; ++i)
    for (size_t j = 0; j < dim; ++j) z[i * dim + j] += b[j];
}

double softmax_loss(const double* logits, const int8_t* y, size_t batch,
                    double* probs) {
  double loss = 0.0;
  for (size_t i = 0; i < batch; ++i) {
    const double* row = logits + i * kNumActivities;
    double* p = probs + i * kNumActivities;
    double mx = row[0];
    for (int c = 1; c < kNumActivities; ++c) mx = std::max(mx, row[c]);
    double total = 0.0;
    for (int c = 0; c < kNumActivities; ++c) {
      p[c] = std::exp(row[c] - mx);
      total += p[c];
    }
    for (int c = 0; c < kNumActivities; ++c) p[c] /= total;
    if (y != nullptr)
      loss -= std::log(std::max(p[y[i]], 1e-300));
  }
  return batch > 0 ? loss / static_cast<double>(batch) : 0.0;
}

}  // namespace

size_t MlpArchitecture::block_input_dim(int block) const {
  size_t d = input_dim;
  for (int i = 0; i < block; ++i)
    d = skip_concat ? d + static_cast<size_t>(units)
                    : static_cast<size_t>(units);
  return d;
}

size_t MlpArchitecture::final_dim() const {
  return block_input_dim(hidden_layers);
}

MlpNetwork::MlpNetwork(const MlpArchitecture& arch, uint64_t init_seed)
    : arch_(arch) {
  size_t offset = 0;
  auto push_layer = [&](size_t in_dim, size_t out_dim, bool bn) {
    Layout l;
    l.in_dim = in_dim;
    l.out_dim = out_dim;
    l.w = offset;
    offset += in_dim * out_dim;
    l.b = offset;
    offset += out_dim;
    if (bn) {
      l.gamma = offset;
      offset += out_dim;
      l.beta = offset;
      offset += out_dim;
    }
    layers_.push_back(l);
  };
  for (int i = 0; i < arch_.hidden_layers; ++i)
    push_layer(arch_.block_input_dim(i), static_cast<size_t>(arch_.units),
               arch_.batch_norm);
  push_layer(arch_.final_dim(), kNumActivities, false);

  params_.assign(offset, 0.0);
  is_weight_.assign(offset, 0);
  for (size_t li = 0; li < layers_.size(); ++li) {
    const Layout& l = layers_[li];
    std::mt19937_64 rng(mix_seed(init_seed, 3000 + li));
    std::normal_distribution<double> he(
        0.0, std::sqrt(2.0 / static_cast<double>(l.in_dim)));
    for (size_t i = 0; i < l.in_dim * l.out_dim; ++i) {
      params_[l.w + i] = he(rng);
      is_weight_[l.w + i] = 1;
    }
    if (arch_.batch_norm && li + 1 < layers_.size())
      for (size_t j = 0; j < l.out_dim; ++j) params_[l.gamma + j] = 1.0;
  }
  size_t bn_units =
      arch_.batch_norm
          ? static_cast<size_t>(arch_.hidden_layers) *
                static_cast<size_t>(arch_.units)
          : 0;
  running_mean_.assign(bn_units, 0.0);
  running_var_.assign(bn_units, 1.0);
  scratch_.resize(static_cast<size_t>(arch_.hidden_layers));
}

void MlpNetwork::forward_train(const double* x, size_t batch,
                               uint64_t noise_seed, bool update_running,
                               bool stochastic) {
  const auto& kr = kernels::ops();
  const size_t L = static_cast<size_t>(arch_.hidden_layers);
  const double* cur = x;
  size_t cur_dim = arch_.input_dim;

  for (size_t li = 0; li < L; ++li) {
    const Layout& l = layers_[li];
    Scratch& s = scratch_[li];
    const size_t U = l.out_dim;
    s.x.assign(cur, cur + batch * cur_dim);
    s.z.resize(batch * U);
    kr.gemm_nt_f64(cur, params_.data() + l.w, s.z.data(), batch, cur_dim, U);
    add_bias(s.z.data(), params_.data() + l.b, batch, U);

    s.a.resize(batch * U);
    for (size_t i = 0; i < batch * U; ++i)
      s.a[i] = s.z[i] > 0.0 ? s.z[i] : 0.0;

    if (stochastic && arch_.noise_stddev > 0.0) {
      std::mt19937_64 rng(mix_seed(noise_seed, 10 + li));
      std::normal_distribution<double> noise(0.0, arch_.noise_stddev);
      for (size_t i = 0; i < batch * U; ++i) s.a[i] += noise(rng);
    }

    if (arch_.batch_norm) {
      s.mu.assign(U, 0.0);
      s.var.assign(U, 0.0);
      for (size_t i = 0; i < batch; ++i)
        for (size_t j = 0; j < U; ++j) s.mu[j] += s.a[i * U + j];
      for (size_t j = 0; j < U; ++j) s.mu[j] /= static_cast<double>(batch);
      for (size_t i = 0; i < batch; ++i)
        for (size_t j = 0; j < U; ++j) {
          double d = s.a[i * U + j] - s.mu[j];
          s.var[j] += d * d;
        }
      for (size_t j = 0; j < U; ++j) s.var[j] /= static_cast<double>(batch);
      if (update_running) {
        double* rm = running_mean_.data() + li * U;
        double* rv = running_var_.data() + li * U;
        for (size_t j = 0; j < U; ++j) {
          rm[j] = kBnMomentum * rm[j] + (1.0 - kBnMomentum) * s.mu[j];
          rv[j] = kBnMomentum * rv[j] + (1.0 - kBnMomentum) * s.var[j];
        }
      }
      s.xhat.resize(batch * U);
      s.y.resize(batch * U);
      const double* gamma = params_.data() + l.gamma;
      const double* beta = params_.data() + l.beta;
      for (size_t i = 0; i < batch; ++i)
        for (size_t j = 0; j < U; ++j) {
          double xh =
              (s.a[i * U + j] - s.mu[j]) / std::sqrt(s.var[j] + kBnEps);
          s.xhat[i * U + j] = xh;
          s.y[i * U + j] = gamma[j] * xh + beta[j];
        }
    } else {
      s.y = s.a;
    }

    if (stochastic && arch_.dropout_rate > 0.0) {
      s.mask.resize(batch * U);
      std::mt19937_64 rng(mix_seed(noise_seed, 100 + li));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      double keep = 1.0 - arch_.dropout_rate;
      for (size_t i = 0; i < batch * U; ++i) {
        s.mask[i] = u(rng) < keep ? 1.0 / keep : 0.0;
        s.y[i] *= s.mask[i];
      }
    } else {
      s.mask.clear();
    }

    size_t next_dim = arch_.skip_concat ? cur_dim + U : U;
    std::vector<double>& next = (li + 1 == L) ? final_x_ : scratch_[li + 1].x;
    next.resize(batch * next_dim);
    if (arch_.skip_concat) {
      for (size_t i = 0; i < batch; ++i) {
        std::copy(cur + i * cur_dim, cur + (i + 1) * cur_dim,
                  next.data() + i * next_dim);
        std::copy(s.y.data() + i * U, s.y.data() + (i + 1) * U,
                  next.data() + i * next_dim + cur_dim);
      }
    } else {
      std::copy(s.y.begin(), s.y.end(), next.begin());
    }
    cur = next.data();
    cur_dim = next_dim;
  }

  const Layout& out = layers_.back();
  logits_.resize(batch * kNumActivities);
  kr.gemm_nt_f64(cur, params_.data() + out.w, logits_.data(), batch, cur_dim,
                 kNumActivities);
  add_bias(logits_.data(), params_.data() + out.b, batch, kNumActivities);
  probs_.resize(batch * kNumActivities);
}

double MlpNetwork::train_batch(const double* x, const int8_t* y, size_t batch,
                               std::vector<double>& grads, uint64_t noise_seed,
                               bool update_running) {
  const auto& kr = kernels::ops();
  const size_t L = static_cast<size_t>(arch_.hidden_layers);
  forward_train(x, batch, noise_seed, update_running, true);
  double loss = softmax_loss(logits_.data(), y, batch, probs_.data());

  grads.assign(params_.size(), 0.0);

  // output layer
  std::vector<double> dlogits(batch * kNumActivities);
  for (size_t i = 0; i < batch; ++i)
    for (int c = 0; c < kNumActivities; ++c)
      dlogits[i * kNumActivities + c] =
          (probs_[i * kNumActivities + c] - (y[i] == c ? 1.0 : 0.0)) /
          static_cast<double>(batch);

  const Layout& out = layers_.back();
  const double* xl = L > 0 ? final_x_.data() : x;
  kr.gemm_tn_f64(dlogits.data(), xl, grads.data() + out.w, kNumActivities,
                 batch, out.in_dim);
  for (size_t i = 0; i < batch; ++i)
    for (int c = 0; c < kNumActivities; ++c)
      grads[out.b + static_cast<size_t>(c)] +=
          dlogits[i * kNumActivities + c];

  std::vector<double> dx(batch * out.in_dim);
  kr.gemm_nn_f64(dlogits.data(), params_.data() + out.w, dx.data(), batch,
                 kNumActivities, out.in_dim);

  for (size_t li = L; li-- > 0;) {
    const Layout& l = layers_[li];
    Scratch& s = scratch_[li];
    const size_t U = l.out_dim;
    const size_t in_dim = l.in_dim;

    // split the incoming gradient when the block concatenated its input
    std::vector<double> dy(batch * U);
    std::vector<double> dx_skip;
    if (arch_.skip_concat) {
      dx_skip.resize(batch * in_dim);
      size_t wide = in_dim + U;
      for (size_t i = 0; i < batch; ++i) {
        std::copy(dx.data() + i * wide, dx.data() + i * wide + in_dim,
                  dx_skip.data() + i * in_dim);
        std::copy(dx.data() + i * wide + in_dim, dx.data() + (i + 1) * wide,
                  dy.data() + i * U);
      }
    } else {
      std::copy(dx.begin(), dx.end(), dy.begin());
    }

    if (!s.mask.empty())
      for (size_t i = 0; i < batch * U; ++i) dy[i] *= s.mask[i];

    std::vector<double> da(batch * U);
    if (arch_.batch_norm) {
      const double* gamma = params_.data() + l.gamma;
      double inv_b = 1.0 / static_cast<double>(batch);
      for (size_t j = 0; j < U; ++j) {
        double inv_std = 1.0 / std::sqrt(s.var[j] + kBnEps);
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (size_t i = 0; i < batch; ++i) {
          double d = dy[i * U + j];
          sum_dy += d;
          sum_dy_xhat += d * s.xhat[i * U + j];
        }
        grads[l.gamma + j] += sum_dy_xhat;
        grads[l.beta + j] += sum_dy;
        // d a = (gamma/std) * (dy - mean(dy) - xhat * mean(dy*xhat))
        for (size_t i = 0; i < batch; ++i) {
          da[i * U + j] = gamma[j] * inv_std *
                          (dy[i * U + j] - sum_dy * inv_b -
                           s.xhat[i * U + j] * sum_dy_xhat * inv_b);
        }
      }
    } else {
      da = dy;
    }

    std::vector<double> dz(batch * U);
    for (size_t i = 0; i < batch * U; ++i)
      dz[i] = s.z[i] > 0.0 ? da[i] : 0.0;

    kr.gemm_tn_f64(dz.data(), s.x.data(), grads.data() + l.w, U, batch,
                   in_dim);
    for (size_t i = 0; i < batch; ++i)
      for (size_t j = 0; j < U; ++j) grads[l.b + j] += dz[i * U + j];

    std::vector<double> dx_dense(batch * in_dim);
    kr.gemm_nn_f64(dz.data(), params_.data() + l.w, dx_dense.data(), batch, U,
                   in_dim);
    if (arch_.skip_concat)
      for (size_t i = 0; i < batch * in_dim; ++i) dx_dense[i] += dx_skip[i];
    dx = std::move(dx_dense);
  }
  return loss;
}

void MlpNetwork::forward_inference(const double* x, size_t n,
                                   double* probs) const {
  const auto& kr = kernels::ops();
  const size_t L = static_cast<size_t>(arch_.hidden_layers);
  std::vector<double> cur(x, x + n * arch_.input_dim);
  size_t cur_dim = arch_.input_dim;
  std::vector<double> z, next;
  for (size_t li = 0; li < L; ++li) {
    const Layout& l = layers_[li];
    const size_t U = l.out_dim;
    z.resize(n * U);
    kr.gemm_nt_f64(cur.data(), params_.data() + l.w, z.data(), n, cur_dim, U);
    add_bias(z.data(), params_.data() + l.b, n, U);
    for (size_t i = 0; i < n * U; ++i) z[i] = z[i] > 0.0 ? z[i] : 0.0;
    if (arch_.batch_norm) {
      const double* rm = running_mean_.data() + li * U;
      const double* rv = running_var_.data() + li * U;
      const double* gamma = params_.data() + l.gamma;
      const double* beta = params_.data() + l.beta;
      for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < U; ++j)
          z[i * U + j] = gamma[j] * (z[i * U + j] - rm[j]) /
                             std::sqrt(rv[j] + kBnEps) +
                         beta[j];
    }
    size_t next_dim = arch_.skip_concat ? cur_dim + U : U;
    next.resize(n * next_dim);
    if (arch_.skip_concat) {
      for (size_t i = 0; i < n; ++i) {
        std::copy(cur.data() + i * cur_dim, cur.data() + (i + 1) * cur_dim,
                  next.data() + i * next_dim);
        std::copy(z.data() + i * U, z.data() + (i + 1) * U,
                  next.data() + i * next_dim + cur_dim);
      }
    } else {
      std::copy(z.begin(), z.end(), next.begin());
    }
    cur.swap(next);
    cur_dim = next_dim;
  }
  const Layout& out = layers_.back();
  std::vector<double> logits(n * kNumActivities);
  kr.gemm_nt_f64(cur.data(), params_.data() + out.w, logits.data(), n, cur_dim,
                 kNumActivities);
  add_bias(logits.data(), params_.data() + out.b, n, kNumActivities);
  softmax_loss(logits.data(), nullptr, n, probs);
}

double MlpNetwork::min_abs_preactivation() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Scratch& s : scratch_)
    for (double z : s.z) m = std::min(m, std::fabs(z));
  return m;
}

void MlpNetwork::refresh_running_stats(const double* x, size_t n,
                                       size_t batch) {
  if (!arch_.batch_norm || n == 0) return;
  std::fill(running_mean_.begin(), running_mean_.end(), 0.0);
  std::fill(running_var_.begin(), running_var_.end(), 1.0);
  // cumulative averaging over batches, with stochastic layers off
  MlpArchitecture saved = arch_;
  arch_.noise_stddev = 0.0;
  arch_.dropout_rate = 0.0;
  uint64_t k = 0;
  for (size_t begin = 0; begin < n; begin += batch) {
    size_t b = std::min(batch, n - begin);
    if (b < 2) break;
    forward_train(x + begin * arch_.input_dim, b, 0, false, true);
    double w_new = 1.0 / static_cast<double>(k + 1);
    const size_t L = static_cast<size_t>(arch_.hidden_layers);
    for (size_t li = 0; li < L; ++li) {
      const size_t U = layers_[li].out_dim;
      for (size_t j = 0; j < U; ++j) {
        running_mean_[li * U + j] =
            (1.0 - w_new) * running_mean_[li * U + j] +
            w_new * scratch_[li].mu[j];
        running_var_[li * U + j] = (k == 0 ? 0.0
                                           : (1.0 - w_new) *
                                                 running_var_[li * U + j]) +
                                   w_new * scratch_[li].var[j];
      }
    }
    ++k;
  }
  arch_ = saved;
}

namespace {

struct MlpParams {
  MlpArchitecture arch;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  bool swa = false;
  int batch_size = 128;
  int max_epochs = 500;
  double es_min_delta = 1e-3;
  int es_patience = 10;
  double val_fraction = 0.1;
  uint64_t seed = 0;
};

MlpParams params_from_spec(const ModelSpec& spec, size_t input_dim) {
  MlpParams p;
  bool regularized = spec.family == ModelFamily::Rmlp;
  p.arch.input_dim = input_dim;
  p.arch.hidden_layers = static_cast<int>(spec.get("hidden_layers", 3));
  p.arch.units = static_cast<int>(spec.get("units", 128));
  p.arch.batch_norm = spec.get("batch_norm", regularized ? 1 : 0) != 0;
  p.arch.skip_concat = regularized && spec.get("sc", 0) != 0;
  p.arch.noise_stddev = regularized ? spec.get("stddev", 0.0) : 0.0;
  p.arch.dropout_rate = regularized ? spec.get("dropout_rate", 0.0) : 0.0;
  p.learning_rate = spec.get("learning_rate", 1e-3);
  p.weight_decay = regularized ? spec.get("weight_decay", 0.0) : 0.0;
  p.swa = regularized && spec.get("swa", 0) != 0;
  p.batch_size = static_cast<int>(spec.get("batch_size", 128));
  p.max_epochs = static_cast<int>(spec.get("max_epochs", 500));
  p.es_min_delta = spec.get("es_min_delta", 1e-3);
  p.es_patience = static_cast<int>(spec.get("es_patience", 10));
  p.val_fraction = spec.get("val_fraction", 0.1);
  p.seed = spec.seed;

  if (p.arch.hidden_layers < 0 || p.arch.units < 1)
    throw InvalidInputError("mlp: bad architecture");
  if (!(p.learning_rate > 0.0))
    throw InvalidInputError("mlp: learning_rate must be positive");
  if (p.arch.dropout_rate < 0.0 || p.arch.dropout_rate >= 1.0)
    throw InvalidInputError("mlp: dropout_rate must be in [0, 1)");
  if (p.arch.noise_stddev < 0.0 || p.weight_decay < 0.0)
    throw InvalidInputError("mlp: noise/decay must be non-negative");
  if (p.batch_size < 1 || p.max_epochs < 1 || p.es_patience < 1)
    throw InvalidInputError("mlp: bad training control parameters");
  if (!(p.val_fraction > 0.0 && p.val_fraction < 0.5))
    throw InvalidInputError("mlp: val_fraction must be in (0, 0.5)");
  return p;
}

struct AdamState {
  std::vector<double> m, v;
  uint64_t t = 0;
};

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               const std::vector<uint8_t>& is_weight, AdamState& st,
               double lr, double weight_decay) {
  ++st.t;
  double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(st.t));
  double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(st.t));
  for (size_t i = 0; i < params.size(); ++i) {
    double g = grads[i];
    st.m[i] = kAdamBeta1 * st.m[i] + (1.0 - kAdamBeta1) * g;
    st.v[i] = kAdamBeta2 * st.v[i] + (1.0 - kAdamBeta2) * g * g;
    double update = (st.m[i] / bc1) / (std::sqrt(st.v[i] / bc2) + kAdamEps);
    params[i] -= lr * update;
    if (weight_decay > 0.0 && is_weight[i])
      params[i] -= lr * weight_decay * params[i];  // decoupled decay
  }
}

}  // namespace

void MlpModel::predict_proba_rows(const float* rows, size_t n,
                                  double* out) const {
  const size_t dim = arch_input_dim_;
  constexpr size_t kChunk = 512;
  parallel_for((n + kChunk - 1) / kChunk, [&](size_t begin, size_t end) {
    std::vector<float> std_row(dim);
    std::vector<double> x;
    for (size_t chunk = begin; chunk < end; ++chunk) {
      size_t lo = chunk * kChunk, hi = std::min(n, lo + kChunk);
      x.resize((hi - lo) * dim);
      for (size_t i = lo; i < hi; ++i) {
        std_.apply(rows + i * dim, std_row.data(), dim);
        for (size_t j = 0; j < dim; ++j)
          x[(i - lo) * dim + j] = static_cast<double>(std_row[j]);
      }
      net_.forward_inference(x.data(), hi - lo, out + lo * kNumActivities);
    }
  });
}

std::unique_ptr<Classifier> fit_mlp(const ModelSpec& spec,
                                    const FeatureMatrix& train) {
  MlpParams p = params_from_spec(spec, train.cols);
  const size_t n = train.rows;
  const size_t dim = train.cols;
  if (n < 10) throw InvalidInputError("mlp: too few training records");

  auto model = std::make_unique<MlpModel>();
  model->family_ = spec.family;
  model->arch_input_dim_ = dim;
  model->std_ = Standardizer::fit(train.values.data(), n, dim);

  // standardized double copy
  std::vector<float> std_values =
      model->std_.transform(train.values.data(), n, dim);
  std::vector<double> x(n * dim);
  for (size_t i = 0; i < n * dim; ++i)
    x[i] = static_cast<double>(std_values[i]);

  // stratified early-stopping split
  std::vector<uint32_t> train_idx, val_idx;
  {
    std::array<std::vector<uint32_t>, kNumActivities> by_class;
    for (size_t i = 0; i < n; ++i)
      by_class[static_cast<size_t>(train.labels[i])].push_back(
          static_cast<uint32_t>(i));
    for (int c = 0; c < kNumActivities; ++c) {
      auto& idx = by_class[static_cast<size_t>(c)];
      if (idx.empty()) continue;
      std::mt19937_64 rng(mix_seed(p.seed, 500 + c));
      std::shuffle(idx.begin(), idx.end(), rng);
      size_t k = idx.size() >= 2
                     ? std::max<size_t>(
                           1, static_cast<size_t>(std::llround(
                                  p.val_fraction *
                                  static_cast<double>(idx.size()))))
                     : 0;
      if (k >= idx.size()) k = idx.size() - 1;
      for (size_t i = 0; i < idx.size(); ++i)
        (i < k ? val_idx : train_idx).push_back(idx[i]);
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
  }
  if (val_idx.empty() || train_idx.empty())
    throw InvalidInputError("mlp: early-stopping split degenerate");

  std::vector<double> val_x(val_idx.size() * dim);
  std::vector<int8_t> val_y(val_idx.size());
  for (size_t i = 0; i < val_idx.size(); ++i) {
    std::copy(x.data() + val_idx[i] * dim, x.data() + (val_idx[i] + 1) * dim,
              val_x.data() + i * dim);
    val_y[i] = train.labels[val_idx[i]];
  }

  model->net_ = MlpNetwork(p.arch, mix_seed(p.seed, 1));
  MlpNetwork& net = model->net_;
  AdamState adam;
  adam.m.assign(net.params().size(), 0.0);
  adam.v.assign(net.params().size(), 0.0);

  auto val_loss_of = [&](MlpNetwork& candidate) {
    std::vector<double> probs(val_idx.size() * kNumActivities);
    candidate.forward_inference(val_x.data(), val_idx.size(), probs.data());
    double loss = 0.0;
    for (size_t i = 0; i < val_idx.size(); ++i)
      loss -= std::log(std::max(
          probs[i * kNumActivities + static_cast<size_t>(val_y[i])],
          kLogLossClip));
    return loss / static_cast<double>(val_idx.size());
  };

  std::vector<double> grads;
  std::vector<double> best_params;
  std::vector<double> best_rm, best_rv;
  double best_val = std::numeric_limits<double>::infinity();
  int since_improve = 0;

  // plateau-averaged weights; reset on improvement, so the average spans the
  // flat region early stopping ends in
  std::vector<double> swa_params;
  uint64_t swa_count = 0;

  std::vector<uint32_t> order = train_idx;
  std::vector<double> batch_x(static_cast<size_t>(p.batch_size) * dim);
  std::vector<int8_t> batch_y(static_cast<size_t>(p.batch_size));
  int epoch = 0;
  for (; epoch < p.max_epochs; ++epoch) {
    std::mt19937_64 rng(mix_seed(p.seed, 1000 + epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double train_loss = 0.0;
    size_t batches = 0;
    for (size_t at = 0; at < order.size();
         at += static_cast<size_t>(p.batch_size)) {
      size_t b = std::min<size_t>(p.batch_size, order.size() - at);
      for (size_t i = 0; i < b; ++i) {
        uint32_t row = order[at + i];
        std::copy(x.data() + row * dim, x.data() + (row + 1) * dim,
                  batch_x.data() + i * dim);
        batch_y[i] = train.labels[row];
      }
      double loss = net.train_batch(batch_x.data(), batch_y.data(), b, grads,
                                    mix_seed(p.seed, 2000 + epoch, batches),
                                    true);
      if (!std::isfinite(loss))
        throw TrainingDivergedError("mlp: NaN loss at epoch " +
                                    std::to_string(epoch));
      adam_step(net.params(), grads, net.is_weight(), adam, p.learning_rate,
                p.weight_decay);
      train_loss += loss;
      ++batches;
    }

    double val = val_loss_of(net);
    model->val_losses_.push_back(val);
    if (!std::isfinite(val))
      throw TrainingDivergedError("mlp: NaN validation loss at epoch " +
                                  std::to_string(epoch));
    if (val < best_val - p.es_min_delta) {
      best_val = val;
      best_params = net.params();
      best_rm = net.running_mean();
      best_rv = net.running_var();
      since_improve = 0;
      if (p.swa) {
        swa_params = net.params();
        swa_count = 1;
      }
    } else {
      ++since_improve;
      if (p.swa) {
        if (swa_count == 0) {
          swa_params = net.params();
          swa_count = 1;
        } else {
          double w_new = 1.0 / static_cast<double>(swa_count + 1);
          for (size_t i = 0; i < swa_params.size(); ++i)
            swa_params[i] =
                (1.0 - w_new) * swa_params[i] + w_new * net.params()[i];
          ++swa_count;
        }
      }
      if (since_improve >= p.es_patience) {
        ++epoch;
        break;
      }
    }
  }

  model->report_.epochs_run = epoch;
  if (best_params.empty()) {
    best_params = net.params();
    best_rm = net.running_mean();
    best_rv = net.running_var();
    best_val = val_loss_of(net);
  }

  bool use_swa = false;
  if (p.swa && swa_count >= 2) {
    MlpNetwork avg = net;
    avg.params() = swa_params;
    avg.refresh_running_stats(x.data(), n, static_cast<size_t>(p.batch_size));
    double swa_val = val_loss_of(avg);
    if (swa_val <= best_val) {
      best_params = avg.params();
      best_rm = avg.running_mean();
      best_rv = avg.running_var();
      best_val = swa_val;
      use_swa = true;
    }
  }

  net.params() = best_params;
  net.running_mean() = best_rm;
  net.running_var() = best_rv;
  model->report_.best_val_loss = best_val;
  model->report_.used_swa_average = use_swa;
  return model;
}

void MlpModel::save_payload(std::ostream& out) const {
  detail::write_u64(out, arch_input_dim_);
  detail::write_string(out, family_name(family_));
  detail::write_u32(out, static_cast<uint32_t>(net_.arch().hidden_layers));
  detail::write_u32(out, static_cast<uint32_t>(net_.arch().units));
  detail::write_u32(out, net_.arch().batch_norm ? 1 : 0);
  detail::write_u32(out, net_.arch().skip_concat ? 1 : 0);
  detail::write_f64(out, net_.arch().noise_stddev);
  detail::write_f64(out, net_.arch().dropout_rate);
  detail::write_f32_vec(out, std_.mean);
  detail::write_f32_vec(out, std_.inv_std);
  detail::write_f64_vec(out, net_.params());
  detail::write_f64_vec(out, net_.running_mean());
  detail::write_f64_vec(out, net_.running_var());
  detail::write_f64(out, report_.best_val_loss);
  detail::write_u32(out, static_cast<uint32_t>(report_.epochs_run));
  detail::write_u32(out, report_.used_swa_average ? 1 : 0);
}

std::unique_ptr<Classifier> MlpModel::load(std::istream& in) {
  auto m = std::make_unique<MlpModel>();
  m->arch_input_dim_ = detail::read_u64(in);
  m->family_ = model_family_from_name(detail::read_string(in));
  MlpArchitecture arch;
  arch.input_dim = m->arch_input_dim_;
  arch.hidden_layers = static_cast<int>(detail::read_u32(in));
  arch.units = static_cast<int>(detail::read_u32(in));
  arch.batch_norm = detail::read_u32(in) != 0;
  arch.skip_concat = detail::read_u32(in) != 0;
  arch.noise_stddev = detail::read_f64(in);
  arch.dropout_rate = detail::read_f64(in);
  m->std_.mean = detail::read_f32_vec(in);
  m->std_.inv_std = detail::read_f32_vec(in);
  MlpNetwork net(arch, 0);
  auto params = detail::read_f64_vec(in);
  if (params.size() != net.params().size())
    throw ParseError("mlp payload parameter count mismatch");
  net.params() = std::move(params);
  net.running_mean() = detail::read_f64_vec(in);
  net.running_var() = detail::read_f64_vec(in);
  m->net_ = std::move(net);
  m->report_.best_val_loss = detail::read_f64(in);
  m->report_.epochs_run = static_cast<int>(detail::read_u32(in));
  m->report_.used_swa_average = detail::read_u32(in) != 0;
  return m;
}

std::unique_ptr<Classifier> load_mlp(std::istream& in) {
  return MlpModel::load(in);
}

}  // namespace geoact
