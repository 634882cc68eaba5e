// Copyright 2026 The qfedsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qfed/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qfed/error.hpp"

namespace qfed {

using nlohmann::ordered_json;

namespace {

// Field reader that rejects unknown keys and names the full path on error.
class Reader {
 public:
  Reader(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(field(key) + ": wrong type (got " + std::string(j_.at(key).type_name()) + ")");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  Reader child(const std::string& key) {
    seen_.insert(key);
    static const ordered_json empty = ordered_json::object();
    return Reader(j_.contains(key) ? j_.at(key) : empty, field(key));
  }

  const ordered_json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown field");
    }
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const ordered_json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
auto named(const std::string& field, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(field, 0) == 0) throw;
    throw ConfigError(field + ": " + what);
  }
}

data::DataSource parse_source(Reader& r, const std::filesystem::path& base_dir) {
  const auto kind = r.get<std::string>("kind", "blobs");
  if (kind == "csv") {
    data::CsvSpec csv;
    csv.train_path = r.get<std::string>("train_path", "");
    csv.test_path = r.get<std::string>("test_path", "");
    if (csv.train_path.empty()) throw ConfigError(r.field("train_path") + ": required for kind csv");
    if (csv.test_path.empty()) throw ConfigError(r.field("test_path") + ": required for kind csv");
    if (!base_dir.empty()) {
      if (csv.train_path.is_relative()) csv.train_path = base_dir / csv.train_path;
      if (csv.test_path.is_relative()) csv.test_path = base_dir / csv.test_path;
    }
    return csv;
  }
  data::SyntheticSpec s;
  if (kind == "blobs") {
    s.shape = data::SyntheticSpec::Shape::kBlobs;
  } else if (kind == "separable") {
    s.shape = data::SyntheticSpec::Shape::kSeparable;
    s.n_classes = 2;
  } else {
    throw ConfigError(r.field("kind") + ": unknown dataset kind '" + kind + "'");
  }
  s.n_classes = r.get("n_classes", s.n_classes);
  s.dim = r.get("dim", s.dim);
  s.center_scale = r.get("center_scale", s.center_scale);
  s.spread = r.get("spread", s.spread);
  s.margin = r.get("margin", s.margin);
  return s;
}

ordered_json source_json(const data::DataSource& src) {
  ordered_json j;
  if (const auto* csv = std::get_if<data::CsvSpec>(&src)) {
    j["kind"] = "csv";
    j["train_path"] = csv->train_path.string();
    j["test_path"] = csv->test_path.string();
    return j;
  }
  const auto& s = std::get<data::SyntheticSpec>(src);
  j["kind"] = s.shape == data::SyntheticSpec::Shape::kBlobs ? "blobs" : "separable";
  j["n_classes"] = s.n_classes;
  j["dim"] = s.dim;
  j["center_scale"] = s.center_scale;
  j["spread"] = s.spread;
  j["margin"] = s.margin;
  return j;
}

}  // namespace

std::string to_string(Protocol protocol) { return protocol == Protocol::kQfl ? "qfl" : "mdqfl"; }

void PersonalizationPolicy::validate() const {
  if (train_mode < 0 || train_mode > 1) throw ConfigError("policy[0] (train mode) must be 0 or 1");
  if (update_mode < 0 || update_mode > 2) throw ConfigError("policy[1] (update mode) must be 0, 1 or 2");
  if (test_mode < 0 || test_mode > 2) throw ConfigError("policy[2] (test mode) must be 0, 1 or 2");
}

void ExperimentConfig::validate() const {
  if (n_devices < 1) throw ConfigError("n_devices must be >= 1");
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (n_class < 1 || n_class > 10) throw ConfigError("n_class must be in [1, 10]");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (fixed_k && *fixed_k < 1) throw ConfigError("clustering.k must be >= 1 or null");
  named("optimizer", [&] { optimizer.validate(); return 0; });
  clustering.validate();
  policy.validate();
  comm.validate();
  if (dataset.n_train < 1) throw ConfigError("dataset.n_train must be >= 1");
  if (dataset.n_test < 1) throw ConfigError("dataset.n_test must be >= 1");
  if (dataset.pca_components < 1 || dataset.pca_components > 12) {
    throw ConfigError("dataset.pca_components must be in [1, 12]");
  }
  if (!(dataset.validation_split > 0.0 && dataset.validation_split < 1.0)) {
    throw ConfigError("dataset.validation_split must be in (0, 1)");
  }
  if (model.feature_map_reps < 1) throw ConfigError("model.feature_map_reps must be >= 1");
  if (model.ansatz_reps < 1) throw ConfigError("model.ansatz_reps must be >= 1");
  for (double w : {mix.global, mix.cluster, mix.device, mix.selected}) {
    if (!(w > 0.0)) throw ConfigError("mix weights must be > 0");
  }
}

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Reader r(j, "");

  const auto protocol = r.get<std::string>("protocol", "mdqfl");
  if (protocol == "qfl") {
    cfg.protocol = Protocol::kQfl;
  } else if (protocol == "mdqfl") {
    cfg.protocol = Protocol::kMdqfl;
  } else {
    throw ConfigError("protocol: must be 'qfl' or 'mdqfl', got '" + protocol + "'");
  }
  cfg.n_devices = r.get("n_devices", cfg.n_devices);
  cfg.rounds = r.get("rounds", cfg.rounds);
  cfg.n_class = r.get("n_class", cfg.n_class);
  cfg.workers = r.get("workers", cfg.workers);

  {
    auto o = r.child("optimizer");
    cfg.optimizer.kind = named("optimizer.kind", [&] {
      return opt::kind_from_string(o.get<std::string>("kind", "cobyla"));
    });
    cfg.optimizer.maxiter = o.get("maxiter", cfg.optimizer.maxiter);
    cfg.optimizer.learning_rate = o.get("learning_rate", cfg.optimizer.learning_rate);
    cfg.optimizer.rho_begin = o.get("rho_begin", cfg.optimizer.rho_begin);
    cfg.optimizer.rho_end = o.get("rho_end", cfg.optimizer.rho_end);
    cfg.optimizer.radius_schedule = named("optimizer.radius_schedule", [&] {
      return opt::schedule_from_string(o.get<std::string>("radius_schedule", "adaptive"));
    });
    o.finish();
  }
  {
    auto c = r.child("clustering");
    cfg.clustering.method = named("clustering.method", [&] {
      return cluster::method_from_string(c.get<std::string>("method", "kmeans"));
    });
    if (c.has("k")) {
      cfg.fixed_k = c.get<int>("k", 1);
      cfg.clustering.k = *cfg.fixed_k;
    } else {
      c.get<ordered_json>("k", nullptr);
    }
    cfg.clustering.dbscan_eps = c.get("dbscan_eps", cfg.clustering.dbscan_eps);
    cfg.clustering.dbscan_min_samples = c.get("dbscan_min_samples", cfg.clustering.dbscan_min_samples);
    cfg.clustering.kmeans_n_init = c.get("kmeans_n_init", cfg.clustering.kmeans_n_init);
    const auto init = c.get<std::string>("kmeans_init", "kmeans++");
    if (init == "kmeans++") {
      cfg.clustering.kmeans_init = cluster::KMeansInit::kPlusPlus;
    } else if (init == "farthest_point") {
      cfg.clustering.kmeans_init = cluster::KMeansInit::kFarthestPoint;
    } else {
      throw ConfigError("clustering.kmeans_init: must be 'kmeans++' or 'farthest_point'");
    }
    c.finish();
  }
  {
    const auto policy = r.get<std::vector<int>>("policy", {0, 0, 0});
    if (policy.size() != 3) throw ConfigError("policy: expected [train, update, test] modes");
    cfg.policy = {policy[0], policy[1], policy[2]};
  }
  {
    const auto sel = r.get<std::string>("selection", "loss_argmin");
    if (sel == "loss_argmin") {
      cfg.selection.kind = SelectionKind::kLossArgmin;
    } else if (sel == "uniform_random") {
      cfg.selection.kind = SelectionKind::kUniformRandom;
    } else {
      throw ConfigError("selection: must be 'loss_argmin' or 'uniform_random'");
    }
  }
  {
    auto a = r.child("aggregation");
    const auto w = a.get<std::string>("weighting", "uniform");
    if (w == "uniform") {
      cfg.weighting = AggregationWeighting::kUniform;
    } else if (w == "sample_size") {
      cfg.weighting = AggregationWeighting::kSampleSize;
    } else {
      throw ConfigError("aggregation.weighting: must be 'uniform' or 'sample_size'");
    }
    auto m = a.child("mix");
    cfg.mix.global = m.get("global", cfg.mix.global);
    cfg.mix.cluster = m.get("cluster", cfg.mix.cluster);
    cfg.mix.device = m.get("device", cfg.mix.device);
    cfg.mix.selected = m.get("selected", cfg.mix.selected);
    m.finish();
    a.finish();
  }
  {
    auto d = r.child("dataset");
    cfg.dataset.source = parse_source(d, base_dir);
    cfg.dataset.n_train = d.get("n_train", cfg.dataset.n_train);
    cfg.dataset.n_test = d.get("n_test", cfg.dataset.n_test);
    cfg.dataset.pca_components = d.get("pca_components", cfg.dataset.pca_components);
    cfg.dataset.validation_split = d.get("validation_split", cfg.dataset.validation_split);
    d.finish();
  }
  {
    auto m = r.child("model");
    cfg.model.feature_map_reps = m.get("feature_map_reps", cfg.model.feature_map_reps);
    cfg.model.ansatz_reps = m.get("ansatz_reps", cfg.model.ansatz_reps);
    cfg.model.initial_value = m.get("initial_value", cfg.model.initial_value);
    m.finish();
  }
  {
    auto c = r.child("comm");
    cfg.comm.device_cost = c.get("C_d", cfg.comm.device_cost);
    cfg.comm.aggregation_cost = c.get("C_agg", cfg.comm.aggregation_cost);
    cfg.comm.train_cost = c.get("alpha", cfg.comm.train_cost);
    c.finish();
  }
  {
    auto s = r.child("seeds");
    cfg.seeds.data = s.get("data", cfg.seeds.data);
    cfg.seeds.split = s.get("split", cfg.seeds.split);
    cfg.seeds.device = s.get("device", cfg.seeds.device);
    cfg.clustering.seed = s.get("clustering", cfg.clustering.seed);
    cfg.selection.seed = s.get("selection", cfg.selection.seed);
    s.finish();
  }
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string dump_config(const ExperimentConfig& cfg, int indent) {
  ordered_json j;
  j["protocol"] = to_string(cfg.protocol);
  j["n_devices"] = cfg.n_devices;
  j["rounds"] = cfg.rounds;
  j["n_class"] = cfg.n_class;
  j["workers"] = cfg.workers;
  j["optimizer"] = {{"kind", opt::to_string(cfg.optimizer.kind)},
                    {"maxiter", cfg.optimizer.maxiter},
                    {"learning_rate", cfg.optimizer.learning_rate},
                    {"rho_begin", cfg.optimizer.rho_begin},
                    {"rho_end", cfg.optimizer.rho_end},
                    {"radius_schedule", opt::to_string(cfg.optimizer.radius_schedule)}};
  ordered_json c;
  c["method"] = cluster::to_string(cfg.clustering.method);
  c["k"] = cfg.fixed_k ? ordered_json(*cfg.fixed_k) : ordered_json(nullptr);
  c["dbscan_eps"] = cfg.clustering.dbscan_eps;
  c["dbscan_min_samples"] = cfg.clustering.dbscan_min_samples;
  c["kmeans_n_init"] = cfg.clustering.kmeans_n_init;
  c["kmeans_init"] =
      cfg.clustering.kmeans_init == cluster::KMeansInit::kPlusPlus ? "kmeans++" : "farthest_point";
  j["clustering"] = c;
  j["policy"] = {cfg.policy.train_mode, cfg.policy.update_mode, cfg.policy.test_mode};
  j["selection"] = cfg.selection.kind == SelectionKind::kLossArgmin ? "loss_argmin" : "uniform_random";
  j["aggregation"] = {
      {"weighting", cfg.weighting == AggregationWeighting::kUniform ? "uniform" : "sample_size"},
      {"mix",
       {{"global", cfg.mix.global},
        {"cluster", cfg.mix.cluster},
        {"device", cfg.mix.device},
        {"selected", cfg.mix.selected}}}};
  ordered_json d = source_json(cfg.dataset.source);
  d["n_train"] = cfg.dataset.n_train;
  d["n_test"] = cfg.dataset.n_test;
  d["pca_components"] = cfg.dataset.pca_components;
  d["validation_split"] = cfg.dataset.validation_split;
  j["dataset"] = d;
  j["model"] = {{"feature_map_reps", cfg.model.feature_map_reps},
                {"ansatz_reps", cfg.model.ansatz_reps},
                {"initial_value", cfg.model.initial_value}};
  j["comm"] = {{"C_d", cfg.comm.device_cost},
               {"C_agg", cfg.comm.aggregation_cost},
               {"alpha", cfg.comm.train_cost}};
  j["seeds"] = {{"data", cfg.seeds.data},
                {"split", cfg.seeds.split},
                {"device", cfg.seeds.device},
                {"clustering", cfg.clustering.seed},
                {"selection", cfg.selection.seed}};
  return j.dump(indent);
}

}  // namespace qfed
