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
#include <span>
#include <string>
#include <vector>

#include "qfed/types.hpp"

namespace qfed::cluster {

/// kGmm and kSpectral are reserved names; cluster_devices rejects them.
enum class Method { kKMeans, kAgglomerative, kDbscan, kMeanShift, kGmm, kSpectral };
enum class KMeansInit { kPlusPlus, kFarthestPoint };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct ClusterConfig {
  Method method = Method::kKMeans;
  int k = 1;  // ignored by dbscan and mean_shift
  double dbscan_eps = 0.5;
  int dbscan_min_samples = 5;
  std::uint64_t seed = 0;
  KMeansInit kmeans_init = KMeansInit::kPlusPlus;
  int kmeans_n_init = 10;

  void validate() const;
};

struct ClusterAssignment {
  std::vector<int> labels;               // compacted to 0..K-1
  std::vector<std::vector<int>> groups;  // groups[c] = ascending row indices with label c

  std::size_t cluster_count() const { return groups.size(); }
};

/// max(1, ceil(sqrt(n / 2))), computed in integers.
int cluster_count(int n_devices);

/// Squared Euclidean distance between two parameter vectors.
double pairwise_dissimilarity(std::span<const double> a, std::span<const double> b);

/// ||a - b|| <= epsilon.
bool redundancy_test(std::span<const double> a, std::span<const double> b, double epsilon);

/// Groups the rows of `points` (one row per device). Labels are renumbered in
/// order of first appearance; dbscan noise points become singleton clusters.
ClusterAssignment cluster_devices(const Matrix& points, const ClusterConfig& cfg);

/// Within-cluster sum of squared distances to the cluster means.
double within_cluster_ss(const Matrix& points, std::span<const int> labels);

namespace detail {

struct LloydTrace {
  std::vector<int> labels;
  std::vector<double> inertia;  // after each assignment step
};

/// One k-means run from explicit initial centers; exposes the inertia trace.
LloydTrace lloyd(const Matrix& points, Matrix centers);

Matrix kmeans_init(const Matrix& points, int k, KMeansInit init, std::uint64_t seed);

}  // namespace detail

}  // namespace qfed::cluster
