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

#include "qfed/orchestrator.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "parallel.hpp"
#include "qfed/cluster.hpp"
#include "qfed/comm_model.hpp"
#include "qfed/data.hpp"
#include "qfed/error.hpp"
#include "qfed/log.hpp"

namespace qfed::fl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(context + ": " + e.what());
  }
}

LabeledDataset to_labeled(const data::RawDataset& raw, const data::MinMaxScaler& scaler) {
  return {scaler.transform(raw.features, /*clip=*/true), raw.labels};
}

struct ServerEval {
  double val_loss, val_acc, test_loss, test_acc;
};

ServerEval evaluate_server(const vqc::Classifier& clf, const ModelParams& model,
                           const LabeledDataset& validation, const LabeledDataset& test) {
  return {clf.loss(model, validation), clf.score(model, validation), clf.loss(model, test),
          clf.score(model, test)};
}

// Device-side accuracies of each device's current model on its own splits.
void fill_device_metrics(RoundMetrics& m, std::vector<DeviceState>& devices,
                         const vqc::Classifier& clf, int workers) {
  std::vector<double> train_acc(devices.size()), test_acc(devices.size());
  detail::parallel_for(devices.size(), workers, [&](std::size_t i) {
    train_acc[i] = clf.score(devices[i].params, devices[i].train);
    test_acc[i] = clf.score(devices[i].params, devices[i].test);
  });
  double tr = 0.0, te = 0.0;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    tr += train_acc[i];
    te += test_acc[i];
  }
  m.avg_device_train_acc = tr / static_cast<double>(devices.size());
  m.avg_device_test_acc = te / static_cast<double>(devices.size());
}

void apply_outcome(DeviceState& d, const TrainOutcome& o) {
  d.params = o.params;
  d.latest_loss = o.loss;
  d.train_score = o.train_score;
  d.test_score = o.test_score;
  d.train_wall_time = o.wall_time;
  ++d.trainings;
}

std::vector<TrainOutcome> train_many(const std::vector<DeviceState*>& who,
                                     const std::vector<ModelParams>& starts,
                                     const vqc::Classifier& clf, const ExperimentConfig& cfg,
                                     int round) {
  std::vector<TrainOutcome> out(who.size());
  detail::parallel_for(who.size(), cfg.workers, [&](std::size_t i) {
    try {
      out[i] = train_device(*who[i], starts[i], clf, cfg.optimizer);
    } catch (...) {
      rethrow_with_context("round " + std::to_string(round) + ", device " +
                           std::to_string(who[i]->id));
    }
  });
  return out;
}

void finish_round(RoundMetrics& m, ExperimentResult& res, const Environment& env,
                  std::vector<DeviceState>& devices, const ModelParams& test_model,
                  const ExperimentConfig& cfg, Clock::time_point start) {
  const auto eval = evaluate_server(env.classifier, test_model, env.validation, env.test);
  m.server_val_loss = eval.val_loss;
  m.server_val_acc = eval.val_acc;
  m.server_test_loss = eval.test_loss;
  m.server_test_acc = eval.test_acc;
  fill_device_metrics(m, devices, env.classifier, cfg.workers);
  m.wall_clock = seconds_since(start);
  res.total_trainings += m.trainings;
  res.server_models.push_back(test_model);
  res.rounds.push_back(m);
}

ModelParams mean_of_devices(std::span<const DeviceState> devices, AggregationWeighting weighting) {
  std::vector<ModelParams> models;
  std::vector<double> weights;
  models.reserve(devices.size());
  for (const auto& d : devices) {
    models.push_back(d.params);
    weights.push_back(weighting == AggregationWeighting::kSampleSize
                          ? static_cast<double>(d.train.size())
                          : 1.0);
  }
  return combine_weighted(models, weights);
}

}  // namespace

ModelParams combine(std::span<const ModelParams> models) {
  detail::require(!models.empty(), "combine needs at least one model");
  const std::vector<double> weights(models.size(), 1.0);
  return combine_weighted(models, weights);
}

ModelParams combine_weighted(std::span<const ModelParams> models, std::span<const double> weights) {
  detail::require(!models.empty(), "combine needs at least one model");
  detail::require(models.size() == weights.size(), "combine: one weight per model");
  const std::size_t n = models.front().size();
  ModelParams sum(n, 0.0);
  double total = 0.0;
  for (std::size_t m = 0; m < models.size(); ++m) {
    detail::require(models[m].size() == n, "combine: models differ in length");
    detail::require(weights[m] > 0.0, "combine: weights must be positive");
    for (std::size_t i = 0; i < n; ++i) sum[i] += weights[m] * models[m][i];
    total += weights[m];
  }
  for (auto& v : sum) v /= total;
  return sum;
}

int select_representative(std::span<const DeviceState* const> group, SelectionKind kind,
                          std::mt19937_64& rng) {
  detail::require(!group.empty(), "cannot select from an empty cluster");
  if (kind == SelectionKind::kUniformRandom) {
    std::uniform_int_distribution<std::size_t> pick(0, group.size() - 1);
    return group[pick(rng)]->id;
  }
  const DeviceState* best = nullptr;
  for (const auto* d : group) {
    detail::require(!std::isnan(d->latest_loss), "loss-based selection needs every device's latest loss");
    if (!best || d->latest_loss < best->latest_loss ||
        (d->latest_loss == best->latest_loss && d->id < best->id)) {
      best = d;
    }
  }
  return best->id;
}

ModelParams train_model_for_selected(const PersonalizationPolicy& policy, const ModelParams& global,
                                     const std::optional<ModelParams>& cluster_mean,
                                     const MixWeights& mix) {
  if (policy.train_mode == 0) return global;
  if (!cluster_mean) {
    log::warn("no cluster average yet; training starts from the global model");
    return global;
  }
  const std::vector<ModelParams> models{*cluster_mean, global};
  const std::vector<double> weights{mix.cluster, mix.global};
  return combine_weighted(models, weights);
}

void update_cluster_members(const PersonalizationPolicy& policy, std::span<DeviceState* const> members,
                            std::span<const ModelParams> old_params, const ModelParams& selected,
                            const ModelParams& global, const MixWeights& mix) {
  detail::require(members.size() == old_params.size(), "one old model per cluster member");
  for (std::size_t i = 0; i < members.size(); ++i) {
    switch (policy.update_mode) {
      case 0:
        members[i]->params = selected;
        break;
      case 1: {
        const std::vector<ModelParams> models{selected, old_params[i]};
        const std::vector<double> weights{mix.selected, mix.device};
        members[i]->params = combine_weighted(models, weights);
        break;
      }
      default: {
        const std::vector<ModelParams> models{selected, old_params[i], global};
        const std::vector<double> weights{mix.selected, mix.device, mix.global};
        members[i]->params = combine_weighted(models, weights);
        break;
      }
    }
  }
}

Aggregate aggregate(std::span<const DeviceState> devices, std::span<const ModelParams> cluster_models,
                    AggregationWeighting weighting) {
  detail::require(!devices.empty(), "aggregate needs at least one device");
  detail::require(!cluster_models.empty(), "aggregate needs at least one cluster model");
  return {mean_of_devices(devices, weighting), combine(cluster_models)};
}

ModelParams server_test_model(const PersonalizationPolicy& policy, const ModelParams& global,
                              const ModelParams& cluster_mean, const MixWeights& mix) {
  switch (policy.test_mode) {
    case 0: return global;
    case 1: {
      const std::vector<ModelParams> models{global, cluster_mean};
      const std::vector<double> weights{mix.global, mix.cluster};
      return combine_weighted(models, weights);
    }
    default: return cluster_mean;
  }
}

TrainOutcome train_device(const DeviceState& device, const ModelParams& start,
                          const vqc::Classifier& classifier, const opt::OptimizerConfig& optimizer) {
  const auto t0 = Clock::now();
  const opt::Objective objective = [&](std::span<const double> p) {
    return classifier.loss(p, device.train);
  };
  opt::GradientFn grad;
  if (optimizer.kind == opt::Kind::kAqgd) {
    grad = [&](std::span<const double> p) { return classifier.loss_gradient(p, device.train); };
  }
  const auto run = opt::minimize(objective, start, optimizer, grad);
  TrainOutcome out;
  out.params = run.best_params;
  out.loss = run.best_value;
  out.train_score = classifier.score(out.params, device.train);
  out.test_score = classifier.score(out.params, device.test);
  out.wall_time = seconds_since(t0);
  return out;
}

Environment prepare_environment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& ds = cfg.dataset;
  const auto raw = data::load_dataset(ds.source, ds.n_train, ds.n_test, cfg.seeds.data);
  const auto standardized = data::standardize(raw.train.features, raw.test.features);
  const auto pca = data::pca_fit(standardized.train, ds.pca_components);
  const Matrix train_pca = data::pca_transform(pca, standardized.train);
  const Matrix test_pca = data::pca_transform(pca, standardized.test);
  const auto split =
      data::train_validation_split(train_pca, raw.train.labels, ds.validation_split, cfg.seeds.split);

  int max_label = 0;
  for (const auto* labels : {&raw.train.labels, &raw.test.labels})
    for (int y : *labels) max_label = std::max(max_label, y);

  Environment env{vqc::Classifier({ds.pca_components, cfg.model.feature_map_reps},
                                  {ds.pca_components, cfg.model.ansatz_reps}, max_label + 1),
                  {}, {}, {}, 0};

  const auto server_scaler = data::MinMaxScaler::fit(split.train.features);
  env.validation = to_labeled(split.validation, server_scaler);
  env.test = {server_scaler.transform(test_pca, true), raw.test.labels};

  const auto shards =
      data::lcycle_distribute(split.train.features, split.train.labels, cfg.n_devices, cfg.n_class);
  const ModelParams p0 = env.classifier.initial_params(cfg.model.initial_value);
  for (const auto& shard : shards) {
    auto local = data::device_local_prepare(shard, cfg.seeds.device + static_cast<std::uint64_t>(shard.device_id));
    if (!local) {
      ++env.skipped_devices;
      continue;
    }
    DeviceState d;
    d.id = shard.device_id;
    d.train = std::move(local->train);
    d.test = std::move(local->test);
    d.params = p0;
    env.devices.push_back(std::move(d));
  }
  if (env.devices.empty()) throw ConfigError("n_class/n_devices: no device received usable data");
  return env;
}

void initial_round(std::vector<DeviceState>& devices, const vqc::Classifier& classifier,
                   const ExperimentConfig& cfg) {
  const ModelParams p0 = classifier.initial_params(cfg.model.initial_value);
  std::vector<DeviceState*> who;
  for (auto& d : devices) {
    d.params = p0;
    who.push_back(&d);
  }
  const std::vector<ModelParams> starts(who.size(), p0);
  const auto outcomes = train_many(who, starts, classifier, cfg, 1);
  for (std::size_t i = 0; i < who.size(); ++i) apply_outcome(*who[i], outcomes[i]);
}

ExperimentResult run_mdqfl(const ExperimentConfig& cfg) { return run_mdqfl(cfg, prepare_environment(cfg)); }

ExperimentResult run_mdqfl(const ExperimentConfig& cfg, Environment env) {
  cfg.validate();
  ExperimentResult res;
  auto& devices = env.devices;
  auto& server = res.server;
  const int n_active = static_cast<int>(devices.size());
  std::mt19937_64 selection_rng(cfg.selection.seed);

  // round 1: everyone trains from the initial point
  {
    const auto start = Clock::now();
    initial_round(devices, env.classifier, cfg);
    server.global = mean_of_devices(devices, cfg.weighting);
    server.cluster_mean.reset();
    const auto t = comm::modeled_time_qfl(n_active, cfg.comm);
    RoundMetrics m;
    m.round = 1;
    m.trainings = n_active;
    m.comm_events = comm::comm_events_qfl(n_active);
    m.modeled_comm = t.comm;
    m.modeled_train = t.train;
    m.modeled_total = t.total;
    if (cfg.policy.test_mode != 0) {
      log::warn("no cluster average in the initial round; server evaluates the global model");
    }
    server.test_model = server.global;
    res.cluster_labels.emplace_back();
    finish_round(m, res, env, devices, server.test_model, cfg, start);
  }

  for (int r = 2; r <= cfg.rounds; ++r) {
    const auto start = Clock::now();
    std::vector<ModelParams> snapshot;
    Matrix points(n_active, static_cast<Eigen::Index>(devices.front().params.size()));
    for (int i = 0; i < n_active; ++i) {
      snapshot.push_back(devices[static_cast<std::size_t>(i)].params);
      points.row(i) = Eigen::Map<const Eigen::RowVectorXd>(snapshot.back().data(),
                                                           static_cast<Eigen::Index>(snapshot.back().size()));
    }

    auto ccfg = cfg.clustering;
    ccfg.k = cfg.fixed_k.value_or(cluster::cluster_count(n_active));
    const auto assignment = cluster::cluster_devices(points, ccfg);
    for (int i = 0; i < n_active; ++i) {
      devices[static_cast<std::size_t>(i)].cluster_label = assignment.labels[static_cast<std::size_t>(i)];
    }
    res.cluster_labels.push_back(assignment.labels);

    std::vector<DeviceState*> reps;
    std::vector<ModelParams> starts;
    for (const auto& group : assignment.groups) {
      std::vector<const DeviceState*> members;
      for (int idx : group) members.push_back(&devices[static_cast<std::size_t>(idx)]);
      const int id = select_representative(members, cfg.selection.kind, selection_rng);
      for (int idx : group) {
        if (devices[static_cast<std::size_t>(idx)].id == id) reps.push_back(&devices[static_cast<std::size_t>(idx)]);
      }
      starts.push_back(train_model_for_selected(cfg.policy, server.global, server.cluster_mean, cfg.mix));
    }

    const auto outcomes = train_many(reps, starts, env.classifier, cfg, r);

    server.cluster_models.clear();
    for (std::size_t c = 0; c < assignment.groups.size(); ++c) {
      apply_outcome(*reps[c], outcomes[c]);
      server.cluster_models.push_back(outcomes[c].params);
      std::vector<DeviceState*> members;
      std::vector<ModelParams> old;
      for (int idx : assignment.groups[c]) {
        members.push_back(&devices[static_cast<std::size_t>(idx)]);
        old.push_back(snapshot[static_cast<std::size_t>(idx)]);
      }
      update_cluster_members(cfg.policy, members, old, outcomes[c].params, server.global, cfg.mix);
    }

    const auto agg = aggregate(devices, server.cluster_models, cfg.weighting);
    server.global = agg.global;
    server.cluster_mean = agg.cluster_mean;
    server.test_model = server_test_model(cfg.policy, server.global, *server.cluster_mean, cfg.mix);

    const int k = static_cast<int>(assignment.cluster_count());
    const auto t = comm::modeled_time_clustered(k, cfg.comm);
    RoundMetrics m;
    m.round = r;
    m.trainings = k;
    m.clusters = k;
    m.comm_events = comm::comm_events_clustered(k);
    m.modeled_comm = t.comm;
    m.modeled_train = t.train;
    m.modeled_total = t.total;
    finish_round(m, res, env, devices, server.test_model, cfg, start);
  }

  server.validation = std::move(env.validation);
  server.test = std::move(env.test);
  res.devices = std::move(devices);
  return res;
}

ExperimentResult run_qfl_baseline(const ExperimentConfig& cfg) {
  return run_qfl_baseline(cfg, prepare_environment(cfg));
}

ExperimentResult run_qfl_baseline(const ExperimentConfig& cfg, Environment env) {
  cfg.validate();
  ExperimentResult res;
  auto& devices = env.devices;
  auto& server = res.server;
  const int n_active = static_cast<int>(devices.size());
  const auto t = comm::modeled_time_qfl(n_active, cfg.comm);

  for (int r = 1; r <= cfg.rounds; ++r) {
    const auto start = Clock::now();
    if (r == 1) {
      initial_round(devices, env.classifier, cfg);
    } else {
      std::vector<DeviceState*> who;
      for (auto& d : devices) who.push_back(&d);
      const std::vector<ModelParams> starts(who.size(), server.global);
      const auto outcomes = train_many(who, starts, env.classifier, cfg, r);
      for (std::size_t i = 0; i < who.size(); ++i) apply_outcome(*who[i], outcomes[i]);
    }
    server.global = mean_of_devices(devices, cfg.weighting);
    for (auto& d : devices) d.params = server.global;
    server.test_model = server.global;

    RoundMetrics m;
    m.round = r;
    m.trainings = n_active;
    m.comm_events = comm::comm_events_qfl(n_active);
    m.modeled_comm = t.comm;
    m.modeled_train = t.train;
    m.modeled_total = t.total;
    finish_round(m, res, env, devices, server.test_model, cfg, start);
  }

  server.validation = std::move(env.validation);
  server.test = std::move(env.test);
  res.devices = std::move(devices);
  return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  return cfg.protocol == Protocol::kQfl ? run_qfl_baseline(cfg) : run_mdqfl(cfg);
}

}  // namespace qfed::fl
