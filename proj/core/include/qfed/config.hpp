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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "qfed/cluster.hpp"
#include "qfed/comm_model.hpp"
#include "qfed/data.hpp"
#include "qfed/optim.hpp"

namespace qfed {

enum class Protocol { kQfl, kMdqfl };

/// Index i of each mode selects variant i of the corresponding rule:
/// train_mode {0: global model, 1: mix of cluster average and global},
/// update_mode {0: representative's model, 1: mix with own model,
///              2: mix with own and global model},
/// test_mode {0: global, 1: mix of global and cluster average, 2: cluster average}.
struct PersonalizationPolicy {
  int train_mode = 0;
  int update_mode = 0;
  int test_mode = 0;

  bool operator==(const PersonalizationPolicy&) const = default;
  void validate() const;
};

enum class SelectionKind { kLossArgmin, kUniformRandom };

struct SelectionRule {
  SelectionKind kind = SelectionKind::kLossArgmin;
  std::uint64_t seed = 0;
};

/// Relative weights for the model mixes; all equal means a plain average.
struct MixWeights {
  double global = 1.0;
  double cluster = 1.0;
  double device = 1.0;
  double selected = 1.0;
};

enum class AggregationWeighting { kUniform, kSampleSize };

struct DatasetConfig {
  data::DataSource source = data::SyntheticSpec{};
  std::size_t n_train = 600;
  std::size_t n_test = 200;
  std::size_t pca_components = 4;  // = number of qubits
  double validation_split = 0.8;
};

struct ModelConfig {
  std::size_t feature_map_reps = 1;
  std::size_t ansatz_reps = 3;
  double initial_value = 0.5;
};

struct SeedConfig {
  std::uint64_t data = 7;
  std::uint64_t split = 42;
  std::uint64_t device = 0;
};

struct ExperimentConfig {
  Protocol protocol = Protocol::kMdqfl;
  int n_devices = 10;
  int rounds = 3;
  int n_class = 2;
  opt::OptimizerConfig optimizer;
  cluster::ClusterConfig clustering;
  std::optional<int> fixed_k;  // nullopt: cluster-count rule each round
  PersonalizationPolicy policy;
  SelectionRule selection;
  AggregationWeighting weighting = AggregationWeighting::kUniform;
  MixWeights mix;
  DatasetConfig dataset;
  ModelConfig model;
  comm::CommModelParams comm;
  SeedConfig seeds;
  int workers = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

std::string to_string(Protocol protocol);

/// Parses and validates a JSON experiment config. Relative CSV paths are
/// resolved against `base_dir` when given.
ExperimentConfig parse_config(std::string_view json_text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (every field spelled out, fixed key order).
std::string dump_config(const ExperimentConfig& cfg, int indent = 2);

}  // namespace qfed
