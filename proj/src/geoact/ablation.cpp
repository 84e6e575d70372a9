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

#include "geoact/ablation.hpp"

#include <algorithm>
#include <fstream>

namespace geoact {

std::string_view ablation_axis_name(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::GridResolution: return "grid_resolution";
    case AblationAxis::RelativeLocation: return "relative_location";
    case AblationAxis::GridStatistics: return "grid_statistics";
    case AblationAxis::GridCount: return "grid_count";
    case AblationAxis::ScaleCount: return "scale_count";
  }
  throw InvalidInputError("unknown ablation axis");
}

AblationAxis ablation_axis_from_name(std::string_view name) {
  if (name == "grid_resolution") return AblationAxis::GridResolution;
  if (name == "relative_location") return AblationAxis::RelativeLocation;
  if (name == "grid_statistics") return AblationAxis::GridStatistics;
  if (name == "grid_count") return AblationAxis::GridCount;
  if (name == "scale_count") return AblationAxis::ScaleCount;
  throw InvalidInputError("unknown ablation axis: " + std::string(name));
}

namespace {

// Ladder filtered to resolutions <= cap (empty entries dropped).
ResolutionLadder cap_ladder(const ResolutionLadder& ladder, int cap) {
  ResolutionLadder out;
  for (const auto& e : ladder.entries) {
    ResolutionLadder::Entry kept{e.family, {}};
    for (int r : e.resolutions)
      if (r <= cap) kept.resolutions.push_back(r);
    if (!kept.resolutions.empty()) out.entries.push_back(std::move(kept));
  }
  return out;
}

// The k finest resolutions per family; scale count is per family.
ResolutionLadder finest_k(const ResolutionLadder& ladder, size_t k) {
  ResolutionLadder out;
  for (const auto& e : ladder.entries) {
    size_t take = std::min(k, e.resolutions.size());
    ResolutionLadder::Entry kept{e.family, {}};
    kept.resolutions.assign(e.resolutions.end() - static_cast<long>(take),
                            e.resolutions.end());
    out.entries.push_back(std::move(kept));
  }
  return out;
}

}  // namespace

AblationPlan AblationPlan::make(AblationAxis axis, const FeatureSpec& base) {
  AblationPlan plan;
  plan.axis = axis;
  plan.base = base;
  switch (axis) {
    case AblationAxis::GridResolution: {
      // sweep the anonymization grid from finest to coarsest
      std::vector<int> resolutions;
      for (const auto& e : base.ladder.entries)
        for (int r : e.resolutions)
          if (std::find(resolutions.begin(), resolutions.end(), r) ==
              resolutions.end())
            resolutions.push_back(r);
      std::sort(resolutions.rbegin(), resolutions.rend());
      for (int r : resolutions) {
        AblationVariant v;
        v.name = "resolution=" + std::to_string(r);
        v.spec = base;
        v.spec.ladder = cap_ladder(base.ladder, r);
        v.anon_resolution = r;
        plan.variants.push_back(std::move(v));
      }
      break;
    }
    case AblationAxis::RelativeLocation: {
      auto add = [&](const char* name, bool dist, bool bearing) {
        AblationVariant v;
        v.name = name;
        v.spec = base;
        v.spec.include_distance = dist;
        v.spec.include_bearing = bearing;
        plan.variants.push_back(std::move(v));
      };
      add("base", base.include_distance, base.include_bearing);
      add("no_distance", false, base.include_bearing);
      add("no_bearing", base.include_distance, false);
      add("no_relative", false, false);
      break;
    }
    case AblationAxis::GridStatistics: {
      auto add = [&](const char* name, bool poi, bool user, bool checkin) {
        AblationVariant v;
        v.name = name;
        v.spec = base;
        v.spec.stat_poi = poi;
        v.spec.stat_user = user;
        v.spec.stat_checkin = checkin;
        plan.variants.push_back(std::move(v));
      };
      add("base", base.stat_poi, base.stat_user, base.stat_checkin);
      add("no_poi_count", false, base.stat_user, base.stat_checkin);
      add("no_user_count", base.stat_poi, false, base.stat_checkin);
      add("no_checkin_count", base.stat_poi, base.stat_user, false);
      add("no_stats", false, false, false);
      break;
    }
    case AblationAxis::GridCount: {
      for (size_t take = 1; take <= base.ladder.entries.size(); ++take) {
        AblationVariant v;
        v.name = "grids=" + std::to_string(take);
        v.spec = base;
        v.spec.ladder.entries.assign(base.ladder.entries.begin(),
                                     base.ladder.entries.begin() +
                                         static_cast<long>(take));
        plan.variants.push_back(std::move(v));
      }
      break;
    }
    case AblationAxis::ScaleCount: {
      size_t max_scales = 0;
      for (const auto& e : base.ladder.entries)
        max_scales = std::max(max_scales, e.resolutions.size());
      for (size_t k = 1; k <= max_scales; ++k) {
        AblationVariant v;
        v.name = "scales=" + std::to_string(k);
        v.spec = base;
        v.spec.ladder = finest_k(base.ladder, k);
        plan.variants.push_back(std::move(v));
      }
      break;
    }
  }
  return plan;
}

Dataset coarsen_dataset(const Dataset& d, int resolution) {
  if (resolution > d.anon_resolution)
    throw InvalidInputError("cannot refine an anonymized dataset");
  Dataset out = d;
  out.anon_resolution = resolution;
  for (auto& r : out.records)
    r.cell_code.resize(static_cast<size_t>(resolution));
  return out;
}

std::vector<AblationRow> run_ablation(const AblationPlan& plan,
                                      const Dataset& d, const CityConfig& city,
                                      const ModelSpec& model_spec,
                                      uint64_t seed, uint64_t config_hash) {
  if (d.is_test.empty())
    throw InvalidInputError("run_ablation: dataset has no train/test split");
  std::vector<AblationRow> rows;
  for (const auto& variant : plan.variants) {
    AblationRow row;
    row.variant = variant.name;
    try {
      const Dataset* data = &d;
      Dataset coarsened;
      if (variant.anon_resolution &&
          *variant.anon_resolution != d.anon_resolution) {
        coarsened = coarsen_dataset(d, *variant.anon_resolution);
        data = &coarsened;
      }
      row.feature_dim = variant.spec.dimension();
      TrainContext ctx = build_train_context(*data, variant.spec);
      FeatureMatrix train =
          assemble_features(*data, SplitFilter::TrainOnly, variant.spec, ctx,
                            city);
      FeatureMatrix test = assemble_features(*data, SplitFilter::TestOnly,
                                             variant.spec, ctx, city);
      ModelSpec spec = model_spec;
      spec.seed = seed;
      auto model = fit_model(spec, train);
      auto probs = model->predict_proba(test);
      row.report = evaluate_predictions(
          probs, std::span<const int8_t>(test.labels.data(),
                                         test.labels.size()));
      row.report.model_family = std::string(family_name(spec.family));
      row.report.split = "test";
      row.report.feature_dim = row.feature_dim;
      row.report.seed = seed;
      row.report.config_hash = config_hash;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows,
                        AblationAxis axis, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write ablation csv: " + path);
  out << "axis,variant,status,feature_dim,macro_f1,log_loss";
  for (const auto& name : activity_names()) out << ",\"f1:" << name << '"';
  out << '\n';
  char buf[64];
  for (const auto& row : rows) {
    out << ablation_axis_name(axis) << ',' << row.variant << ','
        << (row.failed ? "failed" : "ok") << ',' << row.feature_dim;
    if (row.failed) {
      out << ",,";
      for (int c = 0; c < kNumActivities; ++c) out << ',';
    } else {
      std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", row.report.f1.macro_f1,
                    row.report.logloss);
      out << buf;
      for (int c = 0; c < kNumActivities; ++c) {
        std::snprintf(buf, sizeof(buf), ",%.6f",
                      row.report.f1.per_class[static_cast<size_t>(c)].f1);
        out << buf;
      }
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing ablation csv: " + path);
}

}  // namespace geoact
