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

#include "geoact/models/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "geoact/metrics.hpp"

namespace geoact {

namespace {

constexpr double kPriorFloor = 1e-12;
constexpr double kGainEps = 1e-12;
constexpr uint32_t kRetired = 0xffffffffu;

double threshold_l1(double g, double alpha) {
  if (g > alpha) return g - alpha;
  if (g < -alpha) return g + alpha;
  return 0.0;
}

double calc_weight(double g, double h, const GbtParams& p) {
  double denom = h + p.reg_lambda;
  if (denom <= 0.0) return 0.0;
  double w = -threshold_l1(g, p.reg_alpha) / denom;
  if (p.max_delta_step > 0) {
    double cap = static_cast<double>(p.max_delta_step);
    w = std::clamp(w, -cap, cap);
  }
  return w;
}

// Objective reduction of a leaf at its optimal (thresholded, clipped) weight,
// in the usual doubled gain units; equals T(g)^2 / (h + lambda) unclipped.
double calc_score(double g, double h, const GbtParams& p) {
  double w = calc_weight(g, h, p);
  return -2.0 * (g * w + 0.5 * (h + p.reg_lambda) * w * w +
                 p.reg_alpha * std::fabs(w));
}

// ceil(fraction * n) distinct elements of [0, n), ascending.
std::vector<uint32_t> sample_indices(size_t n, double fraction, uint64_t seed) {
  size_t k = static_cast<size_t>(
      std::ceil(fraction * static_cast<double>(n) - 1e-12));
  k = std::clamp<size_t>(k, 1, n);
  std::vector<uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  if (k == n) return idx;
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct GrowNode {
  double g = 0.0;
  double h = 0.0;
  uint32_t count = 0;
  double best_gain = 0.0;
  int32_t best_feature = -1;
  float best_threshold = 0.0f;
  int32_t out_id = -1;  // node index in the emitted tree
};

// Depth-wise growth with exact greedy splits over the globally pre-sorted
// feature columns. One builder per (round, class); deterministic given the
// tree seed.
class TreeBuilder {
 public:
  TreeBuilder(const GbtParams& p, size_t n, size_t f, const float* cols,
              const std::vector<uint32_t>* sorted_idx,
              const std::vector<float>* sorted_val)
      : p_(p), n_(n), f_(f), cols_(cols), sorted_idx_(sorted_idx),
        sorted_val_(sorted_val), pos_(n) {}

  GbtTree build(const float* g, const float* h, uint64_t tree_seed) {
    g_ = g;
    h_ = h;
    GbtTree tree;
    tree.nodes.emplace_back();

    std::vector<uint32_t> tree_feats =
        sample_indices(f_, p_.colsample_bytree, mix_seed(tree_seed, 1));

    std::vector<GrowNode> level(1);
    {
      std::mt19937_64 rng(mix_seed(tree_seed, 2));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const bool all = p_.subsample >= 1.0;
      GrowNode& root = level[0];
      root.out_id = 0;
      for (size_t i = 0; i < n_; ++i) {
        if (!all && u(rng) >= p_.subsample) {
          pos_[i] = kRetired;
          continue;
        }
        pos_[i] = 0;
        root.g += g[i];
        root.h += h[i];
        ++root.count;
      }
      if (!std::isfinite(root.g) || !std::isfinite(root.h))
        throw TrainingDivergedError("gbt: non-finite gradient sum");
    }

    for (int depth = 0; depth < p_.max_depth && !level.empty(); ++depth) {
      find_best_splits(level, tree_feats, tree_seed, depth);
      level = apply_splits(tree, level);
    }
    for (const GrowNode& node : level)
      tree.nodes[static_cast<size_t>(node.out_id)].leaf =
          calc_weight(node.g, node.h, p_);
    return tree;
  }

 private:
  bool splittable(const GrowNode& node) const {
    return node.count >= 2 && node.h >= 2.0 * p_.min_child_weight;
  }

  void find_best_splits(std::vector<GrowNode>& level,
                        const std::vector<uint32_t>& tree_feats,
                        uint64_t tree_seed, int depth) {
    const size_t n_nodes = level.size();
    bool any = false;
    for (const GrowNode& node : level) any = any || splittable(node);
    if (!any) return;

    std::vector<uint32_t> feats = tree_feats;
    if (p_.colsample_bylevel < 1.0) {
      auto keep = sample_indices(tree_feats.size(), p_.colsample_bylevel,
                                 mix_seed(tree_seed, 3, depth));
      feats.clear();
      for (uint32_t i : keep) feats.push_back(tree_feats[i]);
    }

    // per-node feature mask, materialized only when bynode sampling is on
    std::vector<uint8_t> node_allows;
    if (p_.colsample_bynode < 1.0) {
      node_allows.assign(n_nodes * feats.size(), 0);
      for (size_t s = 0; s < n_nodes; ++s) {
        auto keep =
            sample_indices(feats.size(), p_.colsample_bynode,
                           mix_seed(tree_seed, 4, depth * 131071 + s));
        for (uint32_t i : keep) node_allows[s * feats.size() + i] = 1;
      }
    }

    struct ScanState {
      double gl;
      double hl;
      uint32_t cnt;
      float last;
    };
    std::vector<ScanState> state(n_nodes);

    for (size_t fi = 0; fi < feats.size(); ++fi) {
      uint32_t f = feats[fi];
      std::fill(state.begin(), state.end(), ScanState{0.0, 0.0, 0, 0.0f});
      const uint32_t* order = sorted_idx_[f].data();
      const float* vals = sorted_val_[f].data();
      const uint8_t* allow =
          node_allows.empty() ? nullptr : node_allows.data() + fi;
      for (size_t i = 0; i < n_; ++i) {
        uint32_t row = order[i];
        uint32_t slot = pos_[row];
        if (slot >= n_nodes) continue;  // retired row
        GrowNode& node = level[slot];
        if (!splittable(node)) continue;
        if (allow != nullptr && allow[slot * feats.size()] == 0) continue;
        ScanState& st = state[slot];
        float v = vals[i];
        if (st.cnt > 0 && v != st.last) {
          // boundary between two distinct values inside this node
          double gr = node.g - st.gl;
          double hr = node.h - st.hl;
          if (st.hl >= p_.min_child_weight && hr >= p_.min_child_weight) {
            double gain = 0.5 * (calc_score(st.gl, st.hl, p_) +
                                 calc_score(gr, hr, p_) -
                                 calc_score(node.g, node.h, p_)) -
                          p_.gamma;
            if (gain > node.best_gain) {
              float thr = 0.5f * (st.last + v);
              if (!(thr > st.last)) thr = v;
              node.best_gain = gain;
              node.best_feature = static_cast<int32_t>(f);
              node.best_threshold = thr;
            }
          }
        }
        st.gl += g_[row];
        st.hl += h_[row];
        ++st.cnt;
        st.last = v;
      }
    }
  }

  std::vector<GrowNode> apply_splits(GbtTree& tree,
                                     std::vector<GrowNode>& level) {
    std::vector<GrowNode> next;
    std::vector<int32_t> next_slot(level.size() * 2, -1);
    for (size_t s = 0; s < level.size(); ++s) {
      GrowNode& node = level[s];
      if (node.best_feature >= 0 && node.best_gain > kGainEps) {
        int32_t left_id = static_cast<int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        GbtTreeNode& out = tree.nodes[static_cast<size_t>(node.out_id)];
        out.feature = node.best_feature;
        out.threshold = node.best_threshold;
        out.left = left_id;
        out.right = left_id + 1;
        GrowNode left, right;
        left.out_id = left_id;
        right.out_id = left_id + 1;
        next_slot[s * 2] = static_cast<int32_t>(next.size());
        next.push_back(left);
        next_slot[s * 2 + 1] = static_cast<int32_t>(next.size());
        next.push_back(right);
      } else {
        GbtTreeNode& out = tree.nodes[static_cast<size_t>(node.out_id)];
        out.leaf = calc_weight(node.g, node.h, p_);
        if (!std::isfinite(out.leaf))
          throw TrainingDivergedError("gbt: non-finite leaf weight");
      }
    }
    for (size_t i = 0; i < n_; ++i) {
      uint32_t slot = pos_[i];
      if (slot >= level.size()) continue;  // retired earlier
      const GrowNode& node = level[slot];
      const GbtTreeNode& out = tree.nodes[static_cast<size_t>(node.out_id)];
      if (out.is_leaf()) {
        pos_[i] = kRetired;
        continue;
      }
      bool go_left =
          cols_[static_cast<size_t>(out.feature) * n_ + i] < out.threshold;
      int32_t ns = next_slot[slot * 2 + (go_left ? 0 : 1)];
      pos_[i] = static_cast<uint32_t>(ns);
      GrowNode& child = next[static_cast<size_t>(ns)];
      child.g += g_[i];
      child.h += h_[i];
      ++child.count;
    }
    return next;
  }

  const GbtParams& p_;
  size_t n_;
  size_t f_;
  const float* cols_;  // column-major [f][n]
  const std::vector<uint32_t>* sorted_idx_;
  const std::vector<float>* sorted_val_;
  std::vector<uint32_t> pos_;
  const float* g_ = nullptr;
  const float* h_ = nullptr;
};

void softmax9(const double* scores, double* probs) {
  double mx = scores[0];
  for (int c = 1; c < kNumActivities; ++c) mx = std::max(mx, scores[c]);
  double total = 0.0;
  for (int c = 0; c < kNumActivities; ++c) {
    probs[c] = std::exp(scores[c] - mx);
    total += probs[c];
  }
  for (int c = 0; c < kNumActivities; ++c) probs[c] /= total;
}

// Tree walk over column-major storage.
double leaf_at_col(const GbtTree& tree, const float* cols, size_t n,
                   size_t row) {
  int32_t id = 0;
  while (!tree.nodes[static_cast<size_t>(id)].is_leaf()) {
    const GbtTreeNode& nd = tree.nodes[static_cast<size_t>(id)];
    float v = cols[static_cast<size_t>(nd.feature) * n + row];
    id = v < nd.threshold ? nd.left : nd.right;
  }
  return tree.nodes[static_cast<size_t>(id)].leaf;
}

}  // namespace

GbtParams GbtParams::from_spec(const ModelSpec& spec) {
  GbtParams p;
  p.eta = spec.get("eta", p.eta);
  p.reg_lambda = spec.get("lambda", p.reg_lambda);
  p.reg_alpha = spec.get("alpha", p.reg_alpha);
  p.gamma = spec.get("gamma", p.gamma);
  p.num_round = static_cast<int>(spec.get("num_round", p.num_round));
  p.max_depth = static_cast<int>(spec.get("max_depth", p.max_depth));
  p.max_delta_step =
      static_cast<int>(spec.get("max_delta_step", p.max_delta_step));
  p.min_child_weight = spec.get("min_child_weight", p.min_child_weight);
  p.subsample = spec.get("subsample", p.subsample);
  p.colsample_bytree = spec.get("colsample_bytree", p.colsample_bytree);
  p.colsample_bylevel = spec.get("colsample_bylevel", p.colsample_bylevel);
  p.colsample_bynode = spec.get("colsample_bynode", p.colsample_bynode);
  p.seed = spec.seed;
  p.validate();
  return p;
}

void GbtParams::validate() const {
  if (!(eta > 0.0 && eta <= 1.0))
    throw InvalidInputError("gbt: eta must be in (0, 1]");
  if (reg_lambda < 0.0 || reg_alpha < 0.0 || gamma < 0.0)
    throw InvalidInputError("gbt: regularizers must be non-negative");
  if (num_round < 0) throw InvalidInputError("gbt: num_round must be >= 0");
  if (max_depth < 1) throw InvalidInputError("gbt: max_depth must be >= 1");
  if (max_delta_step < 0)
    throw InvalidInputError("gbt: max_delta_step must be >= 0");
  if (min_child_weight < 0.0)
    throw InvalidInputError("gbt: min_child_weight must be >= 0");
  if (!(subsample > 0.0 && subsample <= 1.0))
    throw InvalidInputError("gbt: subsample must be in (0, 1]");
  for (double cs : {colsample_bytree, colsample_bylevel, colsample_bynode})
    if (!(cs > 0.0 && cs <= 1.0))
      throw InvalidInputError("gbt: colsample fractions must be in (0, 1]");
}

void GbtModel::raw_scores(const float* row, double* out9) const {
  for (int c = 0; c < kNumActivities; ++c) out9[c] = base_score_[c];
  for (size_t t = 0; t < trees_.size(); ++t)
    out9[t % kNumActivities] += eta_ * trees_[t].leaf_at(row);
}

void GbtModel::predict_proba_rows(const float* rows, size_t n,
                                  double* out) const {
  if (trees_.empty()) {
    // initialization contract: the prior-only model IS the prior
    for (size_t i = 0; i < n; ++i)
      for (int c = 0; c < kNumActivities; ++c)
        out[i * kNumActivities + c] = priors_[c];
    return;
  }
  parallel_for(n, [&](size_t begin, size_t end) {
    double scores[kNumActivities];
    for (size_t i = begin; i < end; ++i) {
      raw_scores(rows + i * dim_, scores);
      softmax9(scores, out + i * kNumActivities);
    }
  });
}

void GbtModel::save_payload(std::ostream& out) const {
  detail::write_u64(out, dim_);
  detail::write_u32(out, static_cast<uint32_t>(rounds_));
  detail::write_f64(out, eta_);
  for (double p : priors_) detail::write_f64(out, p);
  for (double b : base_score_) detail::write_f64(out, b);
  detail::write_u64(out, trees_.size());
  for (const GbtTree& t : trees_) {
    detail::write_u64(out, t.nodes.size());
    for (const GbtTreeNode& n : t.nodes) {
      detail::write_u32(out, static_cast<uint32_t>(n.feature));
      out.write(reinterpret_cast<const char*>(&n.threshold),
                sizeof(n.threshold));
      detail::write_u32(out, static_cast<uint32_t>(n.left));
      detail::write_u32(out, static_cast<uint32_t>(n.right));
      detail::write_f64(out, n.leaf);
    }
  }
  detail::write_f64_vec(out, loss_history_);
}

std::unique_ptr<Classifier> GbtModel::load(std::istream& in) {
  auto m = std::make_unique<GbtModel>();
  m->dim_ = detail::read_u64(in);
  m->rounds_ = static_cast<int>(detail::read_u32(in));
  m->eta_ = detail::read_f64(in);
  for (double& p : m->priors_) p = detail::read_f64(in);
  for (double& b : m->base_score_) b = detail::read_f64(in);
  uint64_t n_trees = detail::read_u64(in);
  m->trees_.resize(n_trees);
  for (GbtTree& t : m->trees_) {
    t.nodes.resize(detail::read_u64(in));
    for (GbtTreeNode& n : t.nodes) {
      n.feature = static_cast<int32_t>(detail::read_u32(in));
      in.read(reinterpret_cast<char*>(&n.threshold), sizeof(n.threshold));
      n.left = static_cast<int32_t>(detail::read_u32(in));
      n.right = static_cast<int32_t>(detail::read_u32(in));
      n.leaf = detail::read_f64(in);
    }
  }
  m->loss_history_ = detail::read_f64_vec(in);
  return m;
}

std::unique_ptr<Classifier> fit_gbt(const ModelSpec& spec,
                                    const FeatureMatrix& train) {
  GbtParams p = GbtParams::from_spec(spec);
  const size_t n = train.rows;
  const size_t f = train.cols;

  auto model = std::make_unique<GbtModel>();
  model->dim_ = f;
  model->rounds_ = p.num_round;
  model->eta_ = p.eta;

  std::array<uint64_t, kNumActivities> class_count{};
  for (int8_t y : train.labels) ++class_count[static_cast<size_t>(y)];
  for (int c = 0; c < kNumActivities; ++c) {
    model->priors_[c] =
        static_cast<double>(class_count[static_cast<size_t>(c)]) /
        static_cast<double>(n);
    model->base_score_[c] = std::log(std::max(model->priors_[c], kPriorFloor));
  }

  // column-major copy + per-feature (value, row) order, sorted once per fit
  std::vector<float> cols(n * f);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < f; ++j) cols[j * n + i] = train.values[i * f + j];
  std::vector<std::vector<uint32_t>> sorted_idx(f);
  std::vector<std::vector<float>> sorted_val(f);
  parallel_for(f, [&](size_t begin, size_t end) {
    for (size_t j = begin; j < end; ++j) {
      auto& idx = sorted_idx[j];
      idx.resize(n);
      std::iota(idx.begin(), idx.end(), 0u);
      const float* col = cols.data() + j * n;
      std::sort(idx.begin(), idx.end(), [col](uint32_t a, uint32_t b) {
        if (col[a] != col[b]) return col[a] < col[b];
        return a < b;
      });
      auto& val = sorted_val[j];
      val.resize(n);
      for (size_t i = 0; i < n; ++i) val[i] = col[idx[i]];
    }
  });

  std::vector<double> scores(n * kNumActivities);
  std::vector<double> probs(n * kNumActivities);
  for (size_t i = 0; i < n; ++i)
    for (int c = 0; c < kNumActivities; ++c)
      scores[i * kNumActivities + c] = model->base_score_[c];

  auto refresh_probs_and_loss = [&]() {
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      softmax9(scores.data() + i * kNumActivities,
               probs.data() + i * kNumActivities);
      double py =
          probs[i * kNumActivities + static_cast<size_t>(train.labels[i])];
      loss -= std::log(std::max(py, kLogLossClip));
    }
    return loss / static_cast<double>(n);
  };

  model->loss_history_.push_back(refresh_probs_and_loss());

  // class-major gradient/hessian buffers, refilled each round
  std::vector<float> grad(kNumActivities * n), hess(kNumActivities * n);
  for (int round = 0; round < p.num_round; ++round) {
    for (size_t i = 0; i < n; ++i) {
      const double* pr = probs.data() + i * kNumActivities;
      for (int c = 0; c < kNumActivities; ++c) {
        double pc = pr[c];
        double g = pc - (train.labels[i] == c ? 1.0 : 0.0);
        double h = pc * (1.0 - pc);
        if (!std::isfinite(g) || !std::isfinite(h))
          throw TrainingDivergedError("gbt: non-finite gradient at round " +
                                      std::to_string(round));
        grad[static_cast<size_t>(c) * n + i] = static_cast<float>(g);
        hess[static_cast<size_t>(c) * n + i] = static_cast<float>(h);
      }
    }

    std::array<GbtTree, kNumActivities> round_trees;
    parallel_for(kNumActivities, [&](size_t begin, size_t end) {
      for (size_t c = begin; c < end; ++c) {
        TreeBuilder builder(p, n, f, cols.data(), sorted_idx.data(),
                            sorted_val.data());
        round_trees[c] = builder.build(
            grad.data() + c * n, hess.data() + c * n,
            mix_seed(p.seed,
                     static_cast<uint64_t>(round) * kNumActivities + c));
      }
    });

    for (int c = 0; c < kNumActivities; ++c) {
      const GbtTree& tree = round_trees[static_cast<size_t>(c)];
      parallel_for(n, [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i)
          scores[i * kNumActivities + static_cast<size_t>(c)] +=
              p.eta * leaf_at_col(tree, cols.data(), n, i);
      });
      model->trees_.push_back(tree);
    }
    model->loss_history_.push_back(refresh_probs_and_loss());
  }
  return model;
}

std::unique_ptr<Classifier> load_gbt(std::istream& in) {
  return GbtModel::load(in);
}

}  // namespace geoact
