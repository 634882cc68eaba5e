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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qfed::opt {

enum class Kind { kCobyla, kGd, kAdam, kAqgd };
enum class RadiusSchedule { kAdaptive, kInverseT };
enum class GradientMethod { kCentralFd, kParameterShift };

std::string to_string(Kind kind);
std::string to_string(RadiusSchedule schedule);
Kind kind_from_string(const std::string& name);
RadiusSchedule schedule_from_string(const std::string& name);

struct OptimizerConfig {
  Kind kind = Kind::kCobyla;
  int maxiter = 5;
  double learning_rate = 0.1;  // gd, adam, aqgd
  double rho_begin = 1.0;      // cobyla initial trust radius
  double rho_end = 1e-4;       // cobyla stops once the radius drops below this
  RadiusSchedule radius_schedule = RadiusSchedule::kAdaptive;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct OptRunResult {
  std::vector<double> best_params;
  double best_value = 0.0;
  std::vector<double> value_history;   // one entry per iteration
  std::vector<double> radius_history;  // cobyla only, radius used in iteration t
  std::size_t evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;
using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

/// Maximum number of objective evaluations `minimize` may spend.
/// cobyla: maxiter * (dim + 2); gradient methods: maxiter * (2 * dim + 1).
std::size_t evaluation_budget(const OptimizerConfig& cfg, std::size_t dim);

/// Minimizes `objective` starting from x0. For kAqgd a caller-supplied
/// `grad` replaces the default parameter-shift gradient of `objective`; it
/// is charged 2 * dim evaluations per call. Throws OptimizationError when
/// the objective returns a non-finite value.
OptRunResult minimize(const Objective& objective, std::span<const double> x0,
                      const OptimizerConfig& cfg, const GradientFn& grad = {});

/// Central differences with step `h`, or the +-pi/2 shift rule.
std::vector<double> gradient(const Objective& objective, std::span<const double> x,
                             GradientMethod method, double h = 1e-6);

/// Checks sum_t [f(theta_t) - f_star] <= L * sum_t radius_t over a recorded
/// cobyla run, where f(theta_t) is value_history[t].
bool regret_upper_bound_check(const OptRunResult& result, double lipschitz_L, double f_star);

}  // namespace qfed::opt
