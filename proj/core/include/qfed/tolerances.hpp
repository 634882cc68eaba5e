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

namespace qfed {

// Numerical tolerances shared by the library and its tests.
struct Tolerances {
  static constexpr double kNorm = 1e-10;         // |sum |a|^2 - 1| after gates
  static constexpr double kGateNorm = 1e-12;     // per-gate norm drift
  static constexpr double kProbabilitySum = 1e-9;
  static constexpr double kProbabilityFloor = 1e-12;  // cross-entropy clamp
  static constexpr double kOrthonormal = 1e-8;   // PCA component rows
  static constexpr double kStandardize = 1e-9;
  static constexpr double kZeroVariance = 1e-12;
  static constexpr double kKMeansShift = 1e-6;
  static constexpr int kKMeansMaxIter = 300;
  static constexpr double kFiniteDiffStep = 1e-6;
};

inline constexpr int kMaxQubits = 12;

}  // namespace qfed
