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

#include "qfed/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "qfed/error.hpp"
#include "qfed/log.hpp"
#include "qfed/tolerances.hpp"

namespace qfed::data {

namespace {

constexpr int kLabelModulus = 10;

RawDataset take_rows(const RawDataset& src, const std::vector<std::size_t>& rows) {
  RawDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), src.features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) =
        src.features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(src.labels[rows[i]]);
  }
  return out;
}

RawDataset head(const RawDataset& src, std::size_t n, const std::string& what) {
  if (n > src.size()) {
    log::warn(what + ": requested " + std::to_string(n) + " rows but only " +
              std::to_string(src.size()) + " available; truncating");
    n = src.size();
  }
  RawDataset out;
  out.features = src.features.topRows(static_cast<Eigen::Index>(n));
  out.labels.assign(src.labels.begin(), src.labels.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  return cells;
}

double parse_number(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw LoadError(path.string() + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
  }
  return v;
}

RawDataset generate(const SyntheticSpec& spec, std::size_t n, std::uint64_t seed) {
  if (spec.dim < 1) throw ConfigError("dataset.dim must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RawDataset out;
  out.features.resize(static_cast<Eigen::Index>(n), spec.dim);
  out.labels.resize(n);

  if (spec.shape == SyntheticSpec::Shape::kBlobs) {
    if (spec.n_classes < 1 || spec.n_classes > kLabelModulus) {
      throw ConfigError("dataset.n_classes must be in [1, 10]");
    }
    Matrix centers(spec.n_classes, spec.dim);
    for (Eigen::Index c = 0; c < centers.rows(); ++c)
      for (Eigen::Index j = 0; j < centers.cols(); ++j) centers(c, j) = spec.center_scale * normal(rng);
    std::uniform_int_distribution<int> pick(0, spec.n_classes - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const int label = pick(rng);
      out.labels[i] = label;
      for (Eigen::Index j = 0; j < spec.dim; ++j) {
        out.features(static_cast<Eigen::Index>(i), j) = centers(label, j) + spec.spread * normal(rng);
      }
    }
    return out;
  }

  if (!(spec.margin >= 0.0 && spec.margin < 0.5)) throw ConfigError("dataset.margin must be in [0, 0.5)");
  Eigen::RowVectorXd w(spec.dim);
  for (Eigen::Index j = 0; j < spec.dim; ++j) w(j) = normal(rng);
  w.normalize();
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::RowVectorXd x(spec.dim);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    do {
      for (Eigen::Index j = 0; j < spec.dim; ++j) x(j) = unif(rng);
      s = w.dot(x);
    } while (std::abs(s) < spec.margin);
    out.features.row(static_cast<Eigen::Index>(i)) = x;
    out.labels[i] = s > 0.0 ? 1 : 0;
  }
  return out;
}

}  // namespace

RawDataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open dataset file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw LoadError(path.string() + ": missing header row");
  const auto header = split_csv_line(line);
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw LoadError(path.string() + ": no 'label' column");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  const auto n_features = static_cast<Eigen::Index>(header.size() - 1);

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " columns, got " +
                      std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_number(cells[c], path, line_no);
      if (c == label_col) {
        if (v != std::floor(v) || v < 0 || v >= kLabelModulus) {
          throw LoadError(path.string() + ":" + std::to_string(line_no) +
                          ": label must be an integer in [0, 10)");
        }
        labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
  }
  RawDataset out;
  out.labels = std::move(labels);
  out.features = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(out.labels.size()),
                                          n_features);
  return out;
}

TrainTest load_dataset(const DataSource& source, std::size_t n_train, std::size_t n_test,
                       std::uint64_t seed) {
  if (n_train < 1 || n_test < 1) throw ConfigError("dataset.n_train and dataset.n_test must be >= 1");
  if (const auto* csv = std::get_if<CsvSpec>(&source)) {
    return {head(read_csv(csv->train_path), n_train, "train set"),
            head(read_csv(csv->test_path), n_test, "test set")};
  }
  const auto& spec = std::get<SyntheticSpec>(source);
  const RawDataset all = generate(spec, n_train + n_test, seed);
  std::vector<std::size_t> train_rows(n_train), test_rows(n_test);
  std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
  std::iota(test_rows.begin(), test_rows.end(), n_train);
  return {take_rows(all, train_rows), take_rows(all, test_rows)};
}

StandardScaler StandardScaler::fit(const Matrix& x) {
  detail::require(x.rows() > 0, "standardize needs a non-empty training set");
  StandardScaler s;
  s.mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - s.mean;
  s.scale = (centered.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (s.scale(j) < Tolerances::kZeroVariance) s.scale(j) = 0.0;
  }
  return s;
}

Matrix StandardScaler::transform(const Matrix& x) const {
  detail::require(x.cols() == mean.size(), "standardize: column count mismatch");
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (scale(j) == 0.0) {
      out.col(j).setZero();
    } else {
      out.col(j) = (x.col(j).array() - mean(j)) / scale(j);
    }
  }
  return out;
}

Standardized standardize(const Matrix& train, const Matrix& test) {
  auto scaler = StandardScaler::fit(train);
  return {scaler.transform(train), scaler.transform(test), std::move(scaler)};
}

PcaModel pca_fit(const Matrix& x, std::size_t k) {
  const auto rows = static_cast<std::size_t>(x.rows());
  const auto cols = static_cast<std::size_t>(x.cols());
  if (k < 1 || k > std::min(rows, cols)) {
    throw ConfigError("pca: k = " + std::to_string(k) + " must be in [1, min(rows, cols) = " +
                      std::to_string(std::min(rows, cols)) + "]");
  }
  PcaModel model;
  model.k = k;
  model.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - model.mean;
  const double denom = rows > 1 ? static_cast<double>(rows - 1) : 1.0;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("pca: eigendecomposition failed");

  const auto d = static_cast<Eigen::Index>(cols);
  model.components.resize(static_cast<Eigen::Index>(k), d);
  model.explained_variance.resize(static_cast<Eigen::Index>(k));
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(k); ++c) {
    // eigenvalues come back ascending
    const Eigen::Index src = d - 1 - c;
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    model.components.row(c) = v.transpose();
    model.explained_variance(c) = std::max(0.0, eig.eigenvalues()(src));
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& x) {
  detail::require(x.cols() == model.mean.size(), "pca_transform: column count mismatch");
  return (x.rowwise() - model.mean) * model.components.transpose();
}

Split train_validation_split(const Matrix& x, const std::vector<int>& y, double alpha,
                             std::uint64_t seed) {
  detail::require(static_cast<std::size_t>(x.rows()) == y.size(), "split: row count mismatch");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("split: alpha must be in (0, 1)");
  const std::size_t m = y.size();
  if (m < 2) throw ConfigError("split: need at least 2 rows");
  const auto n_train = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(m)));
  if (n_train == 0 || n_train == m) {
    throw ConfigError("split: alpha = " + std::to_string(alpha) + " leaves an empty side for " +
                      std::to_string(m) + " rows");
  }
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  const RawDataset all{x, y};
  return {take_rows(all, {perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train)}),
          take_rows(all, {perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end()})};
}

bool label_in_cyclic_range(int label, int start, int end) {
  if (end > start) return label >= start && label < end;
  return label >= start || label < end;
}

std::vector<DeviceDataShard> lcycle_distribute(const Matrix& x, const std::vector<int>& y,
                                               int n_devices, int n_class) {
  detail::require(static_cast<std::size_t>(x.rows()) == y.size(), "lcycle: row count mismatch");
  if (n_devices < 1) throw ConfigError("n_devices must be >= 1");
  if (n_class < 1 || n_class > kLabelModulus) throw ConfigError("n_class must be in [1, 10]");
  for (int label : y) detail::require(label >= 0 && label < kLabelModulus, "lcycle: label outside [0, 10)");

  std::vector<DeviceDataShard> shards;
  shards.reserve(static_cast<std::size_t>(n_devices));
  for (int i = 0; i < n_devices; ++i) {
    DeviceDataShard shard;
    shard.device_id = i;
    shard.label_start = i % kLabelModulus;
    shard.label_end = (i + n_class) % kLabelModulus;
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (label_in_cyclic_range(y[j], shard.label_start, shard.label_end)) rows.push_back(j);
    }
    const RawDataset picked = take_rows(RawDataset{x, y}, rows);
    shard.features = picked.features;
    shard.labels = picked.labels;
    if (shard.empty()) log::warn("device " + std::to_string(i) + " received an empty shard");
    shards.push_back(std::move(shard));
  }
  return shards;
}

MinMaxScaler MinMaxScaler::fit(const Matrix& x) {
  detail::require(x.rows() > 0, "min-max scaling needs at least one row");
  MinMaxScaler s;
  s.min = x.colwise().minCoeff();
  s.range = x.colwise().maxCoeff() - s.min;
  return s;
}

Matrix MinMaxScaler::transform(const Matrix& x, bool clip) const {
  detail::require(x.cols() == min.size(), "min-max: column count mismatch");
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (range(j) <= Tolerances::kZeroVariance) {
      out.col(j).setZero();
    } else {
      out.col(j) = (x.col(j).array() - min(j)) / range(j);
    }
  }
  if (clip) out = out.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

std::optional<DeviceData> device_local_prepare(const DeviceDataShard& shard, std::uint64_t seed) {
  const std::size_t m = shard.labels.size();
  if (m < 2) {
    log::warn("device " + std::to_string(shard.device_id) + " has " + std::to_string(m) +
              " rows; skipping");
    return std::nullopt;
  }
  const Matrix scaled = MinMaxScaler::fit(shard.features).transform(shard.features);

  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(m))), 1, m - 1);

  const RawDataset all{scaled, shard.labels};
  const auto train = take_rows(all, {perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train)});
  const auto test = take_rows(all, {perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end()});
  return DeviceData{{train.features, train.labels}, {test.features, test.labels}};
}

}  // namespace qfed::data
