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

#include "qfed/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qfed/error.hpp"
#include "qfed/tolerances.hpp"

namespace qfed::vqc {

using std::numbers::pi;

sv::Circuit build_feature_map_circuit(std::span<const double> x, const FeatureMapConfig& cfg) {
  detail::require(cfg.n_qubits >= 1 && cfg.reps >= 1, "feature map needs n_qubits >= 1 and reps >= 1");
  detail::require(x.size() == cfg.n_qubits, "feature vector length must equal n_qubits");
  const std::size_t n = cfg.n_qubits;
  sv::Circuit c;
  c.reserve(cfg.reps * (2 * n + 3 * (n - 1)));
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    for (std::size_t q = 0; q < n; ++q) c.push_back(sv::Gate::h(q));
    for (std::size_t q = 0; q < n; ++q) c.push_back(sv::Gate::p(q, 2.0 * x[q]));
    for (std::size_t q = 0; q + 1 < n; ++q) {
      const double phase = 2.0 * (pi - x[q]) * (pi - x[q + 1]);
      c.push_back(sv::Gate::cx(q, q + 1));
      c.push_back(sv::Gate::p(q + 1, phase));
      c.push_back(sv::Gate::cx(q, q + 1));
    }
  }
  return c;
}

sv::Circuit build_ansatz_circuit(std::span<const double> params, const AnsatzConfig& cfg) {
  detail::require(params.size() == cfg.parameter_count(), "ansatz parameter count mismatch");
  const std::size_t n = cfg.n_qubits;
  sv::Circuit c;
  c.reserve(params.size() + cfg.reps * (n - 1));
  for (std::size_t layer = 0; layer <= cfg.reps; ++layer) {
    for (std::size_t q = 0; q < n; ++q) c.push_back(sv::Gate::ry(q, params[layer * n + q]));
    if (layer == cfg.reps) break;
    for (std::size_t q = 0; q + 1 < n; ++q) c.push_back(sv::Gate::cx(q, q + 1));
  }
  return c;
}

std::vector<double> fold_probabilities(std::span<const double> basis_probs, int n_classes) {
  detail::require(n_classes >= 1 && static_cast<std::size_t>(n_classes) <= basis_probs.size(),
                  "n_classes must be in [1, 2^n_qubits]");
  std::vector<double> out(static_cast<std::size_t>(n_classes), 0.0);
  for (std::size_t i = 0; i < basis_probs.size(); ++i) {
    out[i % static_cast<std::size_t>(n_classes)] += basis_probs[i];
  }
  return out;
}

int argmax_class(std::span<const double> probs) {
  // max_element returns the first maximum
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

Classifier::Classifier(FeatureMapConfig fm, AnsatzConfig ansatz, int n_classes)
    : fm_(fm), ansatz_(ansatz), n_classes_(n_classes) {
  if (fm_.n_qubits != ansatz_.n_qubits) {
    throw ConfigError("feature map and ansatz must act on the same number of qubits");
  }
  if (fm_.n_qubits < 1 || fm_.n_qubits > static_cast<std::size_t>(kMaxQubits)) {
    throw ConfigError("n_qubits out of range: " + std::to_string(fm_.n_qubits));
  }
  if (fm_.reps < 1 || ansatz_.reps < 1) throw ConfigError("circuit reps must be >= 1");
  if (n_classes_ < 1 || n_classes_ > (1 << fm_.n_qubits)) {
    throw ConfigError("n_classes must be in [1, 2^n_qubits], got " + std::to_string(n_classes_));
  }
}

ModelParams Classifier::initial_params(double value) const {
  return ModelParams(parameter_count(), value);
}

void Classifier::check_params(std::span<const double> params) const {
  detail::require(params.size() == parameter_count(), "parameter vector has wrong length");
}

void Classifier::check_labels(const LabeledDataset& data) const {
  detail::require(static_cast<Eigen::Index>(data.size()) == data.features.rows(),
                  "feature/label row count mismatch");
  detail::require(data.features.cols() == static_cast<Eigen::Index>(fm_.n_qubits),
                  "feature count must equal n_qubits");
  for (int y : data.labels) detail::require(y >= 0 && y < n_classes_, "label out of range");
}

std::vector<double> Classifier::basis_probabilities(std::span<const double> params,
                                                    std::span<const double> x) const {
  auto state = sv::StateVector::zero(fm_.n_qubits);
  state.apply(build_feature_map_circuit(x, fm_));
  state.apply(build_ansatz_circuit(params, ansatz_));
  return state.probabilities();
}

std::vector<double> Classifier::predict_proba(std::span<const double> params,
                                              std::span<const double> x) const {
  check_params(params);
  return fold_probabilities(basis_probabilities(params, x), n_classes_);
}

namespace {
std::span<const double> row(const Matrix& m, Eigen::Index i) {
  return {m.row(i).data(), static_cast<std::size_t>(m.cols())};
}
}  // namespace

double Classifier::loss(std::span<const double> params, const LabeledDataset& data) const {
  check_params(params);
  detail::require(!data.empty(), "loss on an empty dataset");
  check_labels(data);
  double total = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto probs = predict_proba(params, row(data.features, static_cast<Eigen::Index>(j)));
    const double p = probs[static_cast<std::size_t>(data.labels[j])];
    total -= std::log(std::max(p, Tolerances::kProbabilityFloor));
  }
  return total / static_cast<double>(data.size());
}

std::vector<double> Classifier::loss_gradient(std::span<const double> params,
                                              const LabeledDataset& data) const {
  check_params(params);
  detail::require(!data.empty(), "loss gradient on an empty dataset");
  check_labels(data);
  const std::size_t n = params.size();
  std::vector<double> grad(n, 0.0);
  std::vector<double> probe(params.begin(), params.end());
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto x = row(data.features, static_cast<Eigen::Index>(j));
    const auto label = static_cast<std::size_t>(data.labels[j]);
    const double p = predict_proba(params, x)[label];
    if (p <= Tolerances::kProbabilityFloor) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double theta = probe[i];
      probe[i] = theta + pi / 2;
      const double p_plus = predict_proba(probe, x)[label];
      probe[i] = theta - pi / 2;
      const double p_minus = predict_proba(probe, x)[label];
      probe[i] = theta;
      grad[i] -= 0.5 * (p_plus - p_minus) / p;
    }
  }
  for (auto& g : grad) g /= static_cast<double>(data.size());
  return grad;
}

double Classifier::score(std::span<const double> params, const LabeledDataset& data) const {
  check_params(params);
  detail::require(!data.empty(), "score on an empty dataset");
  check_labels(data);
  std::size_t correct = 0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    const auto probs = predict_proba(params, row(data.features, static_cast<Eigen::Index>(j)));
    if (argmax_class(probs) == data.labels[j]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace qfed::vqc
