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

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace qfed::sv {

using Complex = std::complex<double>;

enum class GateKind { H, RY, RZ, P, CX };

/// One gate of the supported set. Qubit indices are little-endian:
/// qubit q is bit q of the basis-state index.
struct Gate {
  GateKind kind = GateKind::H;
  std::size_t target = 0;
  std::optional<std::size_t> control;  // CX only
  double angle = 0.0;                  // RY, RZ, P

  static Gate h(std::size_t q) { return {GateKind::H, q, std::nullopt, 0.0}; }
  static Gate ry(std::size_t q, double theta) { return {GateKind::RY, q, std::nullopt, theta}; }
  static Gate rz(std::size_t q, double theta) { return {GateKind::RZ, q, std::nullopt, theta}; }
  static Gate p(std::size_t q, double phi) { return {GateKind::P, q, std::nullopt, phi}; }
  static Gate cx(std::size_t control, std::size_t target) {
    return {GateKind::CX, target, control, 0.0};
  }

  bool operator==(const Gate&) const = default;
};

using Circuit = std::vector<Gate>;

/// Dense pure state on n qubits (1 <= n <= kMaxQubits).
class StateVector {
 public:
  /// |0...0>. Throws ConfigError when n_qubits is out of range.
  static StateVector zero(std::size_t n_qubits);

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t dim() const noexcept { return amps_.size(); }
  std::span<const Complex> amplitudes() const noexcept { return amps_; }

  /// In-place gate application. Throws ContractViolation on bad indices.
  void apply(const Gate& gate);
  void apply(std::span<const Gate> circuit);

  /// |a_i|^2 for every basis index.
  std::vector<double> probabilities() const;
  double norm_squared() const;

 private:
  StateVector(std::size_t n, std::vector<Complex> amps)
      : n_qubits_(n), amps_(std::move(amps)) {}

  void apply_single(std::size_t target, const Complex (&u)[2][2]);
  void apply_diagonal(std::size_t target, Complex d0, Complex d1);
  void apply_cx(std::size_t control, std::size_t target);

  std::size_t n_qubits_;
  std::vector<Complex> amps_;
};

/// Free-function form of StateVector::zero.
StateVector init_zero_state(std::size_t n_qubits);

/// Returns a new state; `state` is left untouched.
StateVector apply_gate(StateVector state, const Gate& gate);

std::vector<double> measurement_probabilities(const StateVector& state);

}  // namespace qfed::sv
