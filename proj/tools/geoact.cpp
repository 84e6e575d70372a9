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

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "geoact/ablation.hpp"
#include "geoact/dataset_io.hpp"
#include "geoact/geojson.hpp"
#include "geoact/metrics.hpp"
#include "geoact/runconfig.hpp"
#include "geoact/synth.hpp"
#include "geoact/tuning.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace geoact;

constexpr int kExitOk = 0;
constexpr int kExitArtifact = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitUsage = 64;

struct FeatureFlags {
  std::string ladder = "gh:4-10,og:4-10";
  bool no_user = false, no_time = false;
  bool no_distance = false, no_bearing = false;
  bool no_stat_poi = false, no_stat_user = false, no_stat_checkin = false;
};

void add_feature_flags(CLI::App* cmd, FeatureFlags& ff) {
  cmd->add_option("--ladder", ff.ladder,
                  "grid ladder, e.g. gh:4-10,og:4-10 or gh:5,7,9");
  cmd->add_flag("--no-user", ff.no_user, "drop user features");
  cmd->add_flag("--no-time", ff.no_time, "drop timestamp features");
  cmd->add_flag("--no-distance", ff.no_distance, "drop distance-to-center");
  cmd->add_flag("--no-bearing", ff.no_bearing, "drop bearing-to-center");
  cmd->add_flag("--no-stat-poi", ff.no_stat_poi, "drop POI counts");
  cmd->add_flag("--no-stat-user", ff.no_stat_user, "drop unique-user counts");
  cmd->add_flag("--no-stat-checkin", ff.no_stat_checkin,
                "drop check-in counts");
}

ResolutionLadder parse_ladder(const std::string& text) {
  ResolutionLadder ladder;
  std::stringstream ss(text);
  std::string entry;
  while (std::getline(ss, entry, ',')) {
    if (entry.empty()) continue;
    size_t colon = entry.find(':');
    if (colon == std::string::npos)
      throw InvalidInputError("bad ladder entry: " + entry);
    ResolutionLadder::Entry e;
    e.family = family_from_token(entry.substr(0, colon));
    std::string spec = entry.substr(colon + 1);
    size_t dash = spec.find('-');
    if (dash != std::string::npos) {
      int lo = std::stoi(spec.substr(0, dash));
      int hi = std::stoi(spec.substr(dash + 1));
      for (int r = lo; r <= hi; ++r) e.resolutions.push_back(r);
    } else {
      std::stringstream rs(spec);
      std::string tok;
      while (std::getline(rs, tok, ';')) e.resolutions.push_back(std::stoi(tok));
    }
    ladder.entries.push_back(std::move(e));
  }
  ladder.validate();
  return ladder;
}

FeatureSpec make_feature_spec(const FeatureFlags& ff) {
  FeatureSpec spec;
  spec.ladder = parse_ladder(ff.ladder);
  spec.include_user = !ff.no_user;
  spec.include_time = !ff.no_time;
  spec.include_distance = !ff.no_distance;
  spec.include_bearing = !ff.no_bearing;
  spec.stat_poi = !ff.no_stat_poi;
  spec.stat_user = !ff.no_stat_user;
  spec.stat_checkin = !ff.no_stat_checkin;
  return spec;
}

void config_add_features(RunConfig& rc, const FeatureFlags& ff) {
  rc.set("ladder", ff.ladder);
  rc.set("include_user", !ff.no_user);
  rc.set("include_time", !ff.no_time);
  rc.set("include_distance", !ff.no_distance);
  rc.set("include_bearing", !ff.no_bearing);
  rc.set("stat_poi", !ff.no_stat_poi);
  rc.set("stat_user", !ff.no_stat_user);
  rc.set("stat_checkin", !ff.no_stat_checkin);
}

CityConfig find_city(const std::vector<CityConfig>& cities,
                     const std::string& name) {
  for (const auto& c : cities)
    if (c.name == name) return c;
  throw IoError("city '" + name + "' not found in city config");
}

std::map<std::string, double> parse_params_file(const std::string& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded())
    throw ParseError("params file is not valid JSON: " + path);
  if (j.contains("config")) j = j["config"];  // accept tune's best.json
  std::map<std::string, double> out;
  for (const auto& [key, value] : j.items()) {
    if (value.is_number()) out[key] = value.get<double>();
  }
  return out;
}

void apply_sets(std::map<std::string, double>& params,
                const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw InvalidInputError("--set expects NAME=VALUE, got: " + s);
    params[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
  }
}

struct LoadedData {
  Dataset dataset;
  CityConfig city;
};

LoadedData load_data(const std::string& dataset_path,
                     const std::string& cities_path) {
  LoadedData d;
  d.dataset = read_dataset(dataset_path);
  d.city = find_city(load_city_configs(cities_path), d.dataset.city);
  return d;
}

// ---- subcommand payloads ----

struct SynthArgs {
  std::string out;
  uint64_t seed = 42;
  double scale = 1.0;
  std::string only_city;
};

int run_synth(const SynthArgs& a) {
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw IoError("cannot write: " + a.out);
  for (auto city : default_synthetic_cities()) {
    if (!a.only_city.empty() && city.name != a.only_city) continue;
    city.n_checkins = static_cast<size_t>(city.n_checkins * a.scale);
    city.n_venues = static_cast<size_t>(std::max(1.0, city.n_venues * a.scale));
    city.n_users = static_cast<size_t>(std::max(1.0, city.n_users * a.scale));
    generate_synthetic_city(city, a.seed, out);
    std::cerr << "[synth] " << city.name << ": " << city.n_checkins
              << " check-ins\n";
  }
  return kExitOk;
}

struct IngestArgs {
  std::string input, cities, taxonomy, out;
  int resolution = 10;
  double test_fraction = 0.2;
  uint64_t seed = 7;
  std::string unknown_policy = "drop";
};

int run_ingest(const IngestArgs& a) {
  RunConfig rc;
  rc.set("command", "ingest");
  rc.set("input", a.input);
  rc.set("cities", a.cities);
  rc.set("taxonomy", a.taxonomy);
  rc.set("anon_resolution", a.resolution);
  rc.set("test_fraction", a.test_fraction);
  rc.set("seed", a.seed);
  rc.set("unknown_policy", a.unknown_policy);
  rc.set("earth_radius_km", kDefaultEarthRadiusKm);
  uint64_t hash = rc.hash();

  auto cities = load_city_configs(a.cities);
  auto taxonomy = ActivityTaxonomy::load(
      a.taxonomy, a.unknown_policy == "error"
                      ? ActivityTaxonomy::UnknownPolicy::Error
                      : ActivityTaxonomy::UnknownPolicy::Drop);
  auto in = open_input(a.input);
  ParseStats stats;
  auto raw = parse_checkins(*in, &stats);
  std::cerr << "[ingest] parsed " << stats.parsed << " records ("
            << stats.malformed << " malformed lines)\n";

  IngestReport report;
  auto datasets = build_dataset(raw, cities, taxonomy,
                                AnonymizationConfig{a.resolution}, &report);
  for (const auto& w : report.warnings)
    std::cerr << "[ingest] warning: " << w << "\n";

  fs::create_directories(a.out);
  rc.write((fs::path(a.out) / "ingest.config.json").string());
  json totals;
  totals["config_hash"] = rc.hash_hex();
  totals["input_records"] = report.input_records;
  totals["outside_cities"] = report.outside_cities;
  totals["unknown_category"] = report.unknown_category;
  totals["malformed_lines"] = stats.malformed;
  json rows = json::array();
  uint64_t sum_checkins = 0, sum_venues = 0, sum_users = 0;
  for (auto& d : datasets) {
    if (d.records.empty()) continue;
    auto split = split_dataset(d, a.test_fraction, a.seed);
    if (!split.unsplittable_classes.empty())
      std::cerr << "[ingest] warning: " << d.city << " has "
                << split.unsplittable_classes.size()
                << " classes with < 2 records (kept in train)\n";
    std::string base = d.city;
    for (auto& ch : base)
      if (ch == ' ' || ch == '/') ch = '_';
    std::string path = (fs::path(a.out) / (base + ".dataset.v1")).string();
    write_dataset(d, path, hash, kDefaultEarthRadiusKm);
    rows.push_back({{"city", d.city},
                    {"checkins", d.summary.checkins},
                    {"venues", d.summary.venues},
                    {"users", d.summary.users},
                    {"test_records", split.test_count},
                    {"file", path}});
    sum_checkins += d.summary.checkins;
    sum_venues += d.summary.venues;
    sum_users += d.summary.users;
    std::cerr << "[ingest] " << d.city << ": " << d.summary.checkins
              << " check-ins, " << d.summary.venues << " venues, "
              << d.summary.users << " users\n";
  }
  totals["cities"] = rows;
  totals["total"] = {{"checkins", sum_checkins},
                     {"venues", sum_venues},
                     {"users", sum_users}};
  std::ofstream summary((fs::path(a.out) / "summary.json").string(),
                        std::ios::binary);
  summary << totals.dump(2) << "\n";
  return kExitOk;
}

struct TuneArgs {
  std::string dataset, cities, model = "gbt", out;
  int trials = 100;
  double hours = 48.0;
  uint64_t seed = 1;
  int folds = 3;
  std::string space_file;
  std::vector<std::string> fixed;
  FeatureFlags features;
};

int run_tune(const TuneArgs& a) {
  LoadedData data = load_data(a.dataset, a.cities);
  if (data.dataset.is_test.empty())
    throw IoError("dataset has no train/test split; run ingest first");
  FeatureSpec fspec = make_feature_spec(a.features);

  RunConfig rc;
  rc.set("command", "tune");
  rc.set("dataset", a.dataset);
  rc.set("city", data.dataset.city);
  rc.set("model", a.model);
  rc.set("trials", a.trials);
  rc.set("hours", a.hours);
  rc.set("seed", a.seed);
  rc.set("folds", a.folds);
  rc.set("earth_radius_km", kDefaultEarthRadiusKm);
  config_add_features(rc, a.features);

  TrainContext ctx = build_train_context(data.dataset, fspec);
  FeatureMatrix train = assemble_features(data.dataset, SplitFilter::TrainOnly,
                                          fspec, ctx, data.city);

  SearchSpace space = a.space_file.empty()
                          ? SearchSpace::defaults(
                                model_family_from_name(a.model))
                          : SearchSpace::from_json(read_text_file(a.space_file));
  // a fixed parameter becomes a single-value choice in the space
  std::map<std::string, double> fixed;
  apply_sets(fixed, a.fixed);
  for (const auto& [name, value] : fixed) {
    ParamDescriptor d;
    d.kind = ParamDescriptor::Kind::Nominal;
    d.values = {value};
    space.params[name] = d;
  }

  fs::create_directories(a.out);
  std::string base = data.dataset.city;
  for (auto& ch : base)
    if (ch == ' ' || ch == '/') ch = '_';
  std::string prefix = (fs::path(a.out) / (base + "." + a.model)).string();
  rc.write(prefix + ".tune.config.json");
  std::ofstream log(prefix + ".trials.jsonl", std::ios::binary);

  Budget budget{a.trials, a.hours * 3600.0};
  SearchResult result = search(space, train, budget, a.seed, {}, &log,
                               a.folds);

  json best;
  best["family"] = a.model;
  best["config_hash"] = rc.hash_hex();
  best["trial"] = result.best.index;
  best["mean_loss"] = result.best.mean_loss;
  best["std_loss"] = result.best.std_loss;
  best["fold_losses"] = result.best.fold_losses;
  best["seed"] = result.best.spec.seed;
  json cfg;
  for (const auto& [name, v] : result.best.spec.params) cfg[name] = v;
  best["config"] = cfg;
  std::ofstream bf(prefix + ".best.json", std::ios::binary);
  bf << best.dump(2) << "\n";
  std::cerr << "[tune] " << data.dataset.city << "/" << a.model << ": best CV "
            << "log loss " << result.best.mean_loss << " +- "
            << result.best.std_loss << " over " << result.trials.size()
            << " trials\n";
  return kExitOk;
}

struct TrainArgs {
  std::string dataset, cities, model = "gbt", out;
  std::string params_file;
  std::vector<std::string> sets;
  uint64_t seed = 1;
  FeatureFlags features;
};

int run_train(const TrainArgs& a) {
  LoadedData data = load_data(a.dataset, a.cities);
  if (data.dataset.is_test.empty())
    throw IoError("dataset has no train/test split; run ingest first");
  FeatureSpec fspec = make_feature_spec(a.features);

  ModelSpec spec;
  spec.family = model_family_from_name(a.model);
  if (!a.params_file.empty()) spec.params = parse_params_file(a.params_file);
  apply_sets(spec.params, a.sets);
  if (spec.family == ModelFamily::Knn && !spec.has("k")) spec.params["k"] = 5;
  spec.seed = a.seed;

  RunConfig rc;
  rc.set("command", "train");
  rc.set("dataset", a.dataset);
  rc.set("city", data.dataset.city);
  rc.set("model", a.model);
  rc.set("seed", a.seed);
  rc.set("earth_radius_km", kDefaultEarthRadiusKm);
  config_add_features(rc, a.features);
  for (const auto& [name, v] : spec.params) rc.set("param." + name, v);

  TrainContext ctx = build_train_context(data.dataset, fspec);
  FeatureMatrix train = assemble_features(data.dataset, SplitFilter::TrainOnly,
                                          fspec, ctx, data.city);
  auto model = fit_model(spec, train);
  save_model(*model, a.out);
  rc.write(a.out + ".config.json");
  std::cerr << "[train] wrote " << a.out << " (d=" << train.cols
            << ", n=" << train.rows << ")\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string dataset, cities, model, external, out;
  std::string split = "test";
  FeatureFlags features;
};

int run_evaluate(const EvaluateArgs& a) {
  LoadedData data = load_data(a.dataset, a.cities);
  FeatureSpec fspec = make_feature_spec(a.features);
  SplitFilter filter = a.split == "train" ? SplitFilter::TrainOnly
                       : a.split == "all" ? SplitFilter::All
                                          : SplitFilter::TestOnly;

  RunConfig rc;
  rc.set("command", "evaluate");
  rc.set("dataset", a.dataset);
  rc.set("city", data.dataset.city);
  rc.set("model", a.model.empty() ? "external:" + a.external : a.model);
  rc.set("split", a.split);
  rc.set("earth_radius_km", kDefaultEarthRadiusKm);
  config_add_features(rc, a.features);

  TrainContext ctx = build_train_context(data.dataset, fspec);
  FeatureMatrix eval =
      assemble_features(data.dataset, filter, fspec, ctx, data.city);

  std::vector<double> probs;
  std::string family = "external";
  if (!a.model.empty()) {
    auto model = load_model(a.model);
    probs = model->predict_proba(eval);
    family = std::string(family_name(model->family()));
  } else if (!a.external.empty()) {
    probs = load_external_probabilities(
        a.external,
        std::span<const uint32_t>(eval.record_ids.data(),
                                  eval.record_ids.size()));
  } else {
    throw InvalidInputError("evaluate needs --model or --external");
  }

  MetricsReport report = evaluate_predictions(
      probs, std::span<const int8_t>(eval.labels.data(), eval.labels.size()));
  report.model_family = family;
  report.split = a.split;
  report.feature_dim = eval.cols;
  report.config_hash = rc.hash();
  report.seed = data.dataset.split_seed;

  std::vector<int8_t> preds(eval.rows);
  for (size_t i = 0; i < eval.rows; ++i)
    preds[i] = static_cast<int8_t>(argmax9(probs.data() + i * kNumActivities));
  ConfusionMatrix cm = confusion(
      std::span<const int8_t>(preds.data(), preds.size()),
      std::span<const int8_t>(eval.labels.data(), eval.labels.size()));

  fs::create_directories(a.out);
  rc.write((fs::path(a.out) / "evaluate.config.json").string());
  std::ofstream mf((fs::path(a.out) / "metrics.json").string(),
                   std::ios::binary);
  mf << report.to_json();
  write_confusion_csv(cm, (fs::path(a.out) / "confusion_counts.csv").string(),
                      false);
  write_confusion_csv(
      cm, (fs::path(a.out) / "confusion_normalized.csv").string(), true);
  std::cerr << "[evaluate] " << a.split << " macro-F1 " << report.f1.macro_f1
            << ", log loss " << report.logloss << " (n=" << report.n << ")\n";
  return kExitOk;
}

struct AblateArgs {
  std::string dataset, cities, axis = "grid_resolution", out;
  std::string params_file;
  std::string model = "gbt";
  std::vector<std::string> sets;
  uint64_t seed = 1;
  FeatureFlags features;
};

int run_ablate(const AblateArgs& a) {
  LoadedData data = load_data(a.dataset, a.cities);
  FeatureSpec base = make_feature_spec(a.features);

  ModelSpec spec;
  spec.family = model_family_from_name(a.model);
  if (!a.params_file.empty()) spec.params = parse_params_file(a.params_file);
  apply_sets(spec.params, a.sets);
  if (spec.family == ModelFamily::Knn && !spec.has("k")) spec.params["k"] = 5;
  spec.seed = a.seed;

  RunConfig rc;
  rc.set("command", "ablate");
  rc.set("dataset", a.dataset);
  rc.set("city", data.dataset.city);
  rc.set("axis", a.axis);
  rc.set("model", a.model);
  rc.set("seed", a.seed);
  rc.set("earth_radius_km", kDefaultEarthRadiusKm);
  config_add_features(rc, a.features);

  AblationPlan plan = AblationPlan::make(ablation_axis_from_name(a.axis), base);
  auto rows = run_ablation(plan, data.dataset, data.city, spec, a.seed,
                           rc.hash());
  fs::create_directories(a.out);
  rc.write((fs::path(a.out) / "ablate.config.json").string());
  write_ablation_csv(rows, plan.axis,
                     (fs::path(a.out) / "ablation.csv").string());
  for (const auto& row : rows) {
    if (row.failed)
      std::cerr << "[ablate] " << row.variant << ": FAILED (" << row.error
                << ")\n";
    else
      std::cerr << "[ablate] " << row.variant << ": macro-F1 "
                << row.report.f1.macro_f1 << ", log loss "
                << row.report.logloss << "\n";
  }
  return kExitOk;
}

struct ExportMapArgs {
  std::string dataset, cities, model, out;
  std::string family = "gh";
  int resolution = 6;
  FeatureFlags features;
};

int run_export_map(const ExportMapArgs& a) {
  LoadedData data = load_data(a.dataset, a.cities);
  FeatureSpec fspec = make_feature_spec(a.features);

  RunConfig rc;
  rc.set("command", "export-map");
  rc.set("dataset", a.dataset);
  rc.set("city", data.dataset.city);
  rc.set("model", a.model);
  rc.set("family", a.family);
  rc.set("resolution", a.resolution);
  rc.set("earth_radius_km", kDefaultEarthRadiusKm);
  config_add_features(rc, a.features);

  TrainContext ctx = build_train_context(data.dataset, fspec);
  FeatureMatrix test = assemble_features(data.dataset, SplitFilter::TestOnly,
                                         fspec, ctx, data.city);
  auto model = load_model(a.model);
  auto preds = model->predict(test);

  fs::create_directories(a.out);
  rc.write((fs::path(a.out) / "export-map.config.json").string());
  auto result = export_geojson(
      data.dataset,
      std::span<const uint32_t>(test.record_ids.data(), test.record_ids.size()),
      std::span<const int8_t>(preds.data(), preds.size()),
      family_from_token(a.family), a.resolution,
      (fs::path(a.out) / "inferred.geojson").string(),
      (fs::path(a.out) / "truth.geojson").string(), rc.hash());
  std::cerr << "[export-map] " << result.cells << " cells, modal agreement "
            << result.modal_agreement_rate << "\n";
  return kExitOk;
}

struct ExportFeaturesArgs {
  std::string dataset, cities, out;
  std::string split = "all";
  FeatureFlags features;
};

int run_export_features(const ExportFeaturesArgs& a) {
  LoadedData data = load_data(a.dataset, a.cities);
  FeatureSpec fspec = make_feature_spec(a.features);
  SplitFilter filter = a.split == "train" ? SplitFilter::TrainOnly
                       : a.split == "test" ? SplitFilter::TestOnly
                                           : SplitFilter::All;
  TrainContext ctx = build_train_context(data.dataset, fspec);
  FeatureMatrix m = assemble_features(data.dataset, filter, fspec, ctx,
                                      data.city);
  write_feature_csv(m, a.out);
  std::cerr << "[export-features] wrote " << m.rows << " x " << m.cols
            << " matrix to " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geoact: offline-activity inference from anonymized check-ins"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker thread cap (default: GEOACT_THREADS or all cores)");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate synthetic check-ins");
  synth->add_option("--out", synth_args.out, "output TSV path")->required();
  synth->add_option("--seed", synth_args.seed, "generator seed");
  synth->add_option("--scale", synth_args.scale, "size multiplier");
  synth->add_option("--city", synth_args.only_city, "only this city");

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "build per-city datasets");
  ingest->add_option("--input", ingest_args.input, "check-in TSV (or .gz)")
      ->required();
  ingest->add_option("--cities", ingest_args.cities, "city config file")
      ->required();
  ingest->add_option("--taxonomy", ingest_args.taxonomy, "category mapping")
      ->required();
  ingest->add_option("--out", ingest_args.out, "output directory")->required();
  ingest->add_option("--resolution", ingest_args.resolution,
                     "anonymization geohash precision");
  ingest->add_option("--test-fraction", ingest_args.test_fraction,
                     "test split fraction");
  ingest->add_option("--seed", ingest_args.seed, "split seed");
  ingest->add_option("--unknown-category", ingest_args.unknown_policy,
                     "drop|error");

  TuneArgs tune_args;
  auto* tune = app.add_subcommand("tune", "hyperparameter search with CV");
  tune->add_option("--dataset", tune_args.dataset, "dataset.v1 file")
      ->required();
  tune->add_option("--cities", tune_args.cities, "city config file")
      ->required();
  tune->add_option("--model", tune_args.model, "knn|gbt|mlp|rmlp");
  tune->add_option("--out", tune_args.out, "output directory")->required();
  tune->add_option("--trials", tune_args.trials, "max trials");
  tune->add_option("--hours", tune_args.hours, "max wall-clock hours");
  tune->add_option("--seed", tune_args.seed, "search seed");
  tune->add_option("--folds", tune_args.folds, "CV folds");
  tune->add_option("--space", tune_args.space_file, "search-space JSON");
  tune->add_option("--fixed", tune_args.fixed,
                   "NAME=VALUE fixed across trials (repeatable)");
  add_feature_flags(tune, tune_args.features);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train one model");
  train->add_option("--dataset", train_args.dataset, "dataset.v1 file")
      ->required();
  train->add_option("--cities", train_args.cities, "city config file")
      ->required();
  train->add_option("--model", train_args.model, "knn|gbt|mlp|rmlp");
  train->add_option("--out", train_args.out, "model output path")->required();
  train->add_option("--params", train_args.params_file,
                    "hyperparameter JSON (accepts tune best.json)");
  train->add_option("--set", train_args.sets, "NAME=VALUE (repeatable)");
  train->add_option("--seed", train_args.seed, "training seed");
  add_feature_flags(train, train_args.features);

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "metrics on a split");
  evaluate->add_option("--dataset", eval_args.dataset, "dataset.v1 file")
      ->required();
  evaluate->add_option("--cities", eval_args.cities, "city config file")
      ->required();
  evaluate->add_option("--model", eval_args.model, "model file");
  evaluate->add_option("--external", eval_args.external,
                       "external probability file (record_id + 9 columns)");
  evaluate->add_option("--split", eval_args.split, "train|test|all");
  evaluate->add_option("--out", eval_args.out, "output directory")->required();
  add_feature_flags(evaluate, eval_args.features);

  AblateArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "feature ablation sweep");
  ablate->add_option("--dataset", ablate_args.dataset, "dataset.v1 file")
      ->required();
  ablate->add_option("--cities", ablate_args.cities, "city config file")
      ->required();
  ablate->add_option("--axis", ablate_args.axis,
                     "grid_resolution|relative_location|grid_statistics|"
                     "grid_count|scale_count");
  ablate->add_option("--model", ablate_args.model, "model family");
  ablate->add_option("--params", ablate_args.params_file,
                     "hyperparameter JSON");
  ablate->add_option("--set", ablate_args.sets, "NAME=VALUE (repeatable)");
  ablate->add_option("--seed", ablate_args.seed, "training seed");
  ablate->add_option("--out", ablate_args.out, "output directory")->required();
  add_feature_flags(ablate, ablate_args.features);

  ExportMapArgs map_args;
  auto* export_map = app.add_subcommand("export-map", "GeoJSON activity maps");
  export_map->add_option("--dataset", map_args.dataset, "dataset.v1 file")
      ->required();
  export_map->add_option("--cities", map_args.cities, "city config file")
      ->required();
  export_map->add_option("--model", map_args.model, "model file")->required();
  export_map->add_option("--family", map_args.family, "gh|og");
  export_map->add_option("--resolution", map_args.resolution,
                         "aggregation resolution");
  export_map->add_option("--out", map_args.out, "output directory")
      ->required();
  add_feature_flags(export_map, map_args.features);

  ExportFeaturesArgs feat_args;
  auto* export_features =
      app.add_subcommand("export-features", "feature matrix as CSV");
  export_features->add_option("--dataset", feat_args.dataset, "dataset.v1")
      ->required();
  export_features->add_option("--cities", feat_args.cities, "city config")
      ->required();
  export_features->add_option("--split", feat_args.split, "all|train|test");
  export_features->add_option("--out", feat_args.out, "CSV path")->required();
  add_feature_flags(export_features, feat_args.features);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (threads > 0) set_max_threads(threads);

  try {
    if (*synth) return run_synth(synth_args);
    if (*ingest) return run_ingest(ingest_args);
    if (*tune) return run_tune(tune_args);
    if (*train) return run_train(train_args);
    if (*evaluate) return run_evaluate(eval_args);
    if (*ablate) return run_ablate(ablate_args);
    if (*export_map) return run_export_map(map_args);
    if (*export_features) return run_export_features(feat_args);
  } catch (const TrainingDivergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArtifact;
  }
  return kExitUsage;
}
