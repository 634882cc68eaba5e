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

#include <cstddef>
#include <span>
#include <vector>

#include "qfed/statevec.hpp"
#include "qfed/types.hpp"

namespace qfed::vqc {

/// Second-order Pauli-Z feature map with linear pairing.
struct FeatureMapConfig {
  std::size_t n_qubits = 4;
  std::size_t reps = 1;
};

/// RealAmplitudes-style ansatz: RY layers with linear CX chains between them.
struct AnsatzConfig {
  std::size_t n_qubits = 4;
  std::size_t reps = 3;

  std::size_t parameter_count() const { return n_qubits * (reps + 1); }
};

sv::Circuit build_feature_map_circuit(std::span<const double> x, const FeatureMapConfig& cfg);
sv::Circuit build_ansatz_circuit(std::span<const double> params, const AnsatzConfig& cfg);

/// Folds 2^n basis probabilities into n_classes buckets: basis index i
/// contributes to class i mod n_classes.
std::vector<double> fold_probabilities(std::span<const double> basis_probs, int n_classes);

/// Variational quantum classifier: feature map, ansatz, modulo class
/// interpretation, cross-entropy loss and accuracy.
class Classifier {
 public:
  Classifier(FeatureMapConfig fm, AnsatzConfig ansatz, int n_classes);

  const FeatureMapConfig& feature_map() const { return fm_; }
  const AnsatzConfig& ansatz() const { return ansatz_; }
  int n_classes() const { return n_classes_; }
  std::size_t parameter_count() const { return ansatz_.parameter_count(); }

  /// Default initial point: every angle equal to `value`.
  ModelParams initial_params(double value = 0.5) const;

  std::vector<double> predict_proba(std::span<const double> params,
                                    std::span<const double> x) const;

  /// Mean categorical cross-entropy with probabilities clamped below at 1e-12.
  double loss(std::span<const double> params, const LabeledDataset& data) const;

  /// Exact gradient of `loss`: parameter-shift derivatives of each sample's
  /// class probability combined through d(-log p) = -dp / p. Samples whose
  /// probability sits at the clamp floor contribute nothing.
  std::vector<double> loss_gradient(std::span<const double> params,
                                    const LabeledDataset& data) const;

  /// Fraction of samples whose argmax class (ties to the lower index) matches.
  double score(std::span<const double> params, const LabeledDataset& data) const;

 private:
  void check_params(std::span<const double> params) const;
  void check_labels(const LabeledDataset& data) const;
  std::vector<double> basis_probabilities(std::span<const double> params,
                                          std::span<const double> x) const;

  FeatureMapConfig fm_;
  AnsatzConfig ansatz_;
  int n_classes_;
};

/// Argmax with ties broken toward the smaller index.
int argmax_class(std::span<const double> probs);

}  // namespace qfed::vqc
