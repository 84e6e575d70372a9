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

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "geoact/kernels/kernels.hpp"
#include "geoact/models/model.hpp"

namespace geoact {

namespace {

// Brute-force neighbor classifier over the standardized training matrix.
// Distance ties resolve to the lower training row index.
class KnnModel : public Classifier {
 public:
  KnnModel() = default;
  KnnModel(int k, int metric, Standardizer std, std::vector<float> values,
           std::vector<int8_t> labels, size_t dim)
      : k_(k),
        metric_(metric),
        std_(std::move(std)),
        values_(std::move(values)),
        labels_(std::move(labels)),
        dim_(dim) {}

  ModelFamily family() const override { return ModelFamily::Knn; }
  size_t feature_dim() const override { return dim_; }

  void predict_proba_rows(const float* rows, size_t n,
                          double* out) const override {
    const auto& kr = kernels::ops();
    auto dist_fn = metric_ == 1 ? kr.l1_f32 : kr.l2sq_f32;
    size_t n_train = labels_.size();
    parallel_for(n, [&](size_t begin, size_t end) {
      std::vector<float> q(dim_);
      std::vector<float> dist(n_train);
      std::vector<std::pair<float, uint32_t>> heap;
      heap.reserve(static_cast<size_t>(k_) + 1);
      for (size_t i = begin; i < end; ++i) {
        std_.apply(rows + i * dim_, q.data(), dim_);
        dist_fn(q.data(), values_.data(), n_train, dim_, dist.data());
        // max-heap of the k smallest (distance, index) pairs
        heap.clear();
        for (uint32_t r = 0; r < n_train; ++r) {
          std::pair<float, uint32_t> cand{dist[r], r};
          if (heap.size() < static_cast<size_t>(k_)) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end());
          } else if (cand < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end());
          }
        }
        double* p = out + i * kNumActivities;
        std::fill(p, p + kNumActivities, 0.0);
        for (const auto& [d, r] : heap)
          p[labels_[r]] += 1.0 / static_cast<double>(k_);
      }
    });
  }

  void save_payload(std::ostream& out) const override {
    detail::write_u32(out, static_cast<uint32_t>(k_));
    detail::write_u32(out, static_cast<uint32_t>(metric_));
    detail::write_u64(out, dim_);
    detail::write_f32_vec(out, std_.mean);
    detail::write_f32_vec(out, std_.inv_std);
    detail::write_f32_vec(out, values_);
    detail::write_i8_vec(out, labels_);
  }

  static std::unique_ptr<Classifier> load(std::istream& in) {
    auto m = std::make_unique<KnnModel>();
    m->k_ = static_cast<int>(detail::read_u32(in));
    m->metric_ = static_cast<int>(detail::read_u32(in));
    m->dim_ = detail::read_u64(in);
    m->std_.mean = detail::read_f32_vec(in);
    m->std_.inv_std = detail::read_f32_vec(in);
    m->values_ = detail::read_f32_vec(in);
    m->labels_ = detail::read_i8_vec(in);
    if (m->values_.size() != m->labels_.size() * m->dim_)
      throw ParseError("knn payload size mismatch");
    return m;
  }

 private:
  int k_ = 1;
  int metric_ = 2;
  Standardizer std_;
  std::vector<float> values_;
  std::vector<int8_t> labels_;
  size_t dim_ = 0;
};

}  // namespace

std::unique_ptr<Classifier> fit_knn(const ModelSpec& spec,
                                    const FeatureMatrix& train) {
  int k = static_cast<int>(spec.require("k"));
  int metric = static_cast<int>(spec.get("metric", 2));
  if (k < 1 || static_cast<size_t>(k) > train.rows)
    throw InvalidInputError("knn: k must be in [1, n_train]");
  if (metric != 1 && metric != 2)
    throw InvalidInputError("knn: metric must be 1 (L1) or 2 (L2)");
  Standardizer std = Standardizer::fit(train.values.data(), train.rows,
                                       train.cols);
  std::vector<float> values = std.transform(train.values.data(), train.rows,
                                            train.cols);
  return std::make_unique<KnnModel>(k, metric, std::move(std),
                                    std::move(values), train.labels,
                                    train.cols);
}

std::unique_ptr<Classifier> load_knn(std::istream& in) {
  return KnnModel::load(in);
}

}  // namespace geoact
