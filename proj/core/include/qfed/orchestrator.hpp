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

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qfed/config.hpp"
#include "qfed/types.hpp"
#include "qfed/vqc.hpp"

namespace qfed::fl {

struct DeviceState {
  int id = 0;
  LabeledDataset train;
  LabeledDataset test;
  ModelParams params;
  int cluster_label = -1;
  double latest_loss = std::numeric_limits<double>::quiet_NaN();  // f(d_i)
  double train_score = 0.0;
  double test_score = 0.0;
  double train_wall_time = 0.0;  // seconds, last training
  int trainings = 0;
};

struct ServerState {
  ModelParams global;                        // mean of all device models
  std::optional<ModelParams> cluster_mean;   // mean of this round's representative models
  std::vector<ModelParams> cluster_models;   // representative models, in cluster order
  ModelParams test_model;
  LabeledDataset validation;
  LabeledDataset test;
};

struct RoundMetrics {
  int round = 0;  // 1-based; round 1 is the initial all-device training
  int trainings = 0;
  int comm_events = 0;
  int clusters = 0;  // 0 when no clustering happened this round
  double avg_device_train_acc = 0.0;
  double avg_device_test_acc = 0.0;
  double server_val_loss = 0.0;
  double server_val_acc = 0.0;
  double server_test_loss = 0.0;
  double server_test_acc = 0.0;
  double modeled_comm = 0.0;
  double modeled_train = 0.0;
  double modeled_total = 0.0;
  double wall_clock = 0.0;  // seconds; informational, never compared
};

/// Everything a run needs besides the config: the prepared devices and the
/// server's held-out data.
struct Environment {
  vqc::Classifier classifier;
  std::vector<DeviceState> devices;  // only devices with usable data
  LabeledDataset validation;
  LabeledDataset test;
  int skipped_devices = 0;
};

struct ExperimentResult {
  std::vector<RoundMetrics> rounds;
  std::vector<ModelParams> server_models;  // test model per round
  std::vector<std::vector<int>> cluster_labels;  // per round, per device (empty for qfl)
  std::vector<DeviceState> devices;              // final state
  ServerState server;
  int total_trainings = 0;
};

struct TrainOutcome {
  ModelParams params;
  double loss = 0.0;
  double train_score = 0.0;
  double test_score = 0.0;
  double wall_time = 0.0;
};

/// Elementwise arithmetic mean, summed in the given order.
ModelParams combine(std::span<const ModelParams> models);

/// Elementwise weighted mean with positive weights.
ModelParams combine_weighted(std::span<const ModelParams> models, std::span<const double> weights);

/// Lowest latest_loss (ties to the lower id) or a uniform draw from `rng`.
int select_representative(std::span<const DeviceState* const> group, SelectionKind kind,
                          std::mt19937_64& rng);

/// Start vector for a representative's local training. Mode 1 needs the
/// cluster average; without one it falls back to the global model and warns.
ModelParams train_model_for_selected(const PersonalizationPolicy& policy, const ModelParams& global,
                                     const std::optional<ModelParams>& cluster_mean,
                                     const MixWeights& mix = {});

/// Applies the update rule to every member of a cluster. `old_params[i]` is
/// the pre-round model of members[i].
void update_cluster_members(const PersonalizationPolicy& policy, std::span<DeviceState* const> members,
                            std::span<const ModelParams> old_params, const ModelParams& selected,
                            const ModelParams& global, const MixWeights& mix = {});

struct Aggregate {
  ModelParams global;
  ModelParams cluster_mean;
};

/// Global mean over devices (ascending id) and mean of the cluster models.
Aggregate aggregate(std::span<const DeviceState> devices, std::span<const ModelParams> cluster_models,
                    AggregationWeighting weighting = AggregationWeighting::kUniform);

/// Model the server evaluates: global, mix of global and cluster average, or cluster average.
ModelParams server_test_model(const PersonalizationPolicy& policy, const ModelParams& global,
                              const ModelParams& cluster_mean, const MixWeights& mix = {});

/// Warm-started local fit of one device from `start`.
TrainOutcome train_device(const DeviceState& device, const ModelParams& start,
                          const vqc::Classifier& classifier, const opt::OptimizerConfig& optimizer);

/// Runs the data pipeline: load, standardize, PCA, validation split, l-cycle
/// distribution, per-device scaling and split.
Environment prepare_environment(const ExperimentConfig& cfg);

/// Trains every device once from the initial point.
void initial_round(std::vector<DeviceState>& devices, const vqc::Classifier& classifier,
                   const ExperimentConfig& cfg);

ExperimentResult run_mdqfl(const ExperimentConfig& cfg);
ExperimentResult run_mdqfl(const ExperimentConfig& cfg, Environment env);
ExperimentResult run_qfl_baseline(const ExperimentConfig& cfg);
ExperimentResult run_qfl_baseline(const ExperimentConfig& cfg, Environment env);

/// Dispatches on cfg.protocol.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace qfed::fl
