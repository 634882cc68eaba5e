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

#include "qfed/statevec.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qfed/error.hpp"
#include "qfed/tolerances.hpp"

namespace qfed::sv {

StateVector StateVector::zero(std::size_t n_qubits) {
  if (n_qubits < 1 || n_qubits > static_cast<std::size_t>(kMaxQubits)) {
    throw ConfigError("n_qubits must be in [1, " + std::to_string(kMaxQubits) +
                      "], got " + std::to_string(n_qubits));
  }
  std::vector<Complex> amps(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
  amps[0] = 1.0;
  return StateVector(n_qubits, std::move(amps));
}

void StateVector::apply(const Gate& gate) {
  detail::require(gate.target < n_qubits_, "gate target out of range");
  switch (gate.kind) {
    case GateKind::H: {
      const double s = 1.0 / std::numbers::sqrt2;
      const Complex u[2][2] = {{s, s}, {s, -s}};
      apply_single(gate.target, u);
      break;
    }
    case GateKind::RY: {
      const double c = std::cos(gate.angle / 2);
      const double s = std::sin(gate.angle / 2);
      const Complex u[2][2] = {{c, -s}, {s, c}};
      apply_single(gate.target, u);
      break;
    }
    case GateKind::RZ:
      apply_diagonal(gate.target, std::polar(1.0, -gate.angle / 2),
                     std::polar(1.0, gate.angle / 2));
      break;
    case GateKind::P:
      apply_diagonal(gate.target, 1.0, std::polar(1.0, gate.angle));
      break;
    case GateKind::CX:
      detail::require(gate.control.has_value(), "CX requires a control qubit");
      detail::require(*gate.control < n_qubits_, "CX control out of range");
      detail::require(*gate.control != gate.target, "CX control equals target");
      apply_cx(*gate.control, gate.target);
      break;
  }
}

void StateVector::apply(std::span<const Gate> circuit) {
  for (const auto& g : circuit) apply(g);
}

void StateVector::apply_single(std::size_t target, const Complex (&u)[2][2]) {
  const std::size_t stride = std::size_t{1} << target;
  const std::size_t n = amps_.size();
  for (std::size_t base = 0; base < n; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Complex a0 = amps_[i];
      const Complex a1 = amps_[i + stride];
      amps_[i] = u[0][0] * a0 + u[0][1] * a1;
      amps_[i + stride] = u[1][0] * a0 + u[1][1] * a1;
    }
  }
}

void StateVector::apply_diagonal(std::size_t target, Complex d0, Complex d1) {
  const std::size_t mask = std::size_t{1} << target;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    amps_[i] *= (i & mask) ? d1 : d0;
  }
}

void StateVector::apply_cx(std::size_t control, std::size_t target) {
  const std::size_t cmask = std::size_t{1} << control;
  const std::size_t tmask = std::size_t{1} << target;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    // visit each swapped pair once, from its target-bit-clear member
    if ((i & cmask) && !(i & tmask)) std::swap(amps_[i], amps_[i | tmask]);
  }
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(amps_.size());
  for (std::size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
  return p;
}

double StateVector::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

StateVector init_zero_state(std::size_t n_qubits) { return StateVector::zero(n_qubits); }

StateVector apply_gate(StateVector state, const Gate& gate) {
  state.apply(gate);
  return state;
}

std::vector<double> measurement_probabilities(const StateVector& state) {
  return state.probabilities();
}

}  // namespace qfed::sv
