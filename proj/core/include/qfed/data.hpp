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
#include <variant>
#include <vector>

#include "qfed/types.hpp"

namespace qfed::data {

/// Digit-style dataset: labels in [0, 10).
struct RawDataset {
  Matrix features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

/// Deterministic synthetic source.
///  - kBlobs: one isotropic Gaussian per class, centers ~ N(0, center_scale^2).
///  - kSeparable: two classes split by a random hyperplane through the origin,
///    samples uniform in [-1, 1]^dim with |w.x| >= margin.
struct SyntheticSpec {
  enum class Shape { kBlobs, kSeparable };
  Shape shape = Shape::kBlobs;
  int n_classes = 10;
  int dim = 784;
  double center_scale = 3.0;
  double spread = 1.0;
  double margin = 0.1;
};

/// CSV files with a header row, a column named "label", numeric features.
struct CsvSpec {
  std::filesystem::path train_path;
  std::filesystem::path test_path;
};

using DataSource = std::variant<SyntheticSpec, CsvSpec>;

struct TrainTest {
  RawDataset train;
  RawDataset test;
};

/// File sources keep the first n rows (warning when fewer exist); synthetic
/// sources generate n_train + n_test rows from `seed`.
TrainTest load_dataset(const DataSource& source, std::size_t n_train, std::size_t n_test,
                       std::uint64_t seed);

RawDataset read_csv(const std::filesystem::path& path);

/// Per-feature standardization with population standard deviation.
/// Zero-variance features map to 0.
struct StandardScaler {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;  // 0 marks a zero-variance feature

  static StandardScaler fit(const Matrix& x);
  Matrix transform(const Matrix& x) const;
};

struct Standardized {
  Matrix train;
  Matrix test;
  StandardScaler scaler;
};

Standardized standardize(const Matrix& train, const Matrix& test);

/// Top-k principal axes of the training covariance. Each component's
/// largest-magnitude entry is positive.
struct PcaModel {
  Eigen::RowVectorXd mean;
  Matrix components;  // k x d, orthonormal rows
  Eigen::VectorXd explained_variance;
  std::size_t k = 0;
};

PcaModel pca_fit(const Matrix& x, std::size_t k);
Matrix pca_transform(const PcaModel& model, const Matrix& x);

struct Split {
  RawDataset train;
  RawDataset validation;
};

/// Seeded shuffle, first round(alpha * m) rows go to train.
Split train_validation_split(const Matrix& x, const std::vector<int>& y, double alpha,
                             std::uint64_t seed);

struct DeviceDataShard {
  int device_id = 0;
  Matrix features;
  std::vector<int> labels;
  int label_start = 0;  // s_i
  int label_end = 0;    // e_i, exclusive, cyclic

  bool empty() const { return labels.empty(); }
};

/// Cyclic half-open label interval [start, end) modulo 10. end <= start
/// wraps around, so end == start covers every label.
bool label_in_cyclic_range(int label, int start, int end);

/// Device i keeps every row whose label lies in [i mod 10, (i + n_class) mod 10).
/// Rows can land on several devices.
std::vector<DeviceDataShard> lcycle_distribute(const Matrix& x, const std::vector<int>& y,
                                               int n_devices, int n_class);

/// Per-feature min-max scaling to [0, 1]; constant features become 0.
struct MinMaxScaler {
  Eigen::RowVectorXd min;
  Eigen::RowVectorXd range;

  static MinMaxScaler fit(const Matrix& x);
  /// With `clip`, values outside the fitted range are clamped into [0, 1].
  Matrix transform(const Matrix& x, bool clip = false) const;
};

struct DeviceData {
  LabeledDataset train;
  LabeledDataset test;
};

/// Min-max scales the shard with its own statistics, then a seeded 80/20
/// split. Returns nullopt (with a warning) for shards with fewer than 2 rows.
std::optional<DeviceData> device_local_prepare(const DeviceDataShard& shard, std::uint64_t seed);

}  // namespace qfed::data
