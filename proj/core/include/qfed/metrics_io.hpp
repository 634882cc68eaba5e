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

#include <filesystem>
#include <string>
#include <vector>

#include "qfed/config.hpp"
#include "qfed/orchestrator.hpp"

namespace qfed::io {

/// metrics.csv column order. Wall-clock time is deliberately absent so the
/// file is byte-identical across reruns; it lives in timing.csv.
const std::vector<std::string>& metrics_columns();

std::string metrics_csv(const std::vector<fl::RoundMetrics>& rounds);
std::string timing_csv(const std::vector<fl::RoundMetrics>& rounds);

/// Final values, the full config echo, the seed block and the library version.
std::string summary_json(const fl::ExperimentResult& result, const ExperimentConfig& cfg);

/// Writes metrics.csv, timing.csv and summary.json into out_dir (created if
/// needed); with `device_traces`, also devices.csv with final per-device state.
void persist_metrics(const fl::ExperimentResult& result, const ExperimentConfig& cfg,
                     const std::filesystem::path& out_dir, bool device_traces = false);

struct MetricsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of `name` in columns; throws std::out_of_range when absent.
  std::size_t column(const std::string& name) const;
};

MetricsTable read_metrics_csv(const std::filesystem::path& path);

/// Deterministic SVG line chart of the named columns against the round column.
std::string render_svg(const MetricsTable& table, const std::vector<std::string>& series,
                       const std::string& title);

std::string version();

}  // namespace qfed::io
