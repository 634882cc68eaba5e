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

#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "qfed/cluster.hpp"
#include "qfed/error.hpp"

using namespace qfed;
using namespace qfed::cluster;

namespace {

// Two tight blobs far apart; row i belongs to blob truth[i].
Matrix two_blobs(std::vector<int>& truth, std::uint64_t seed, int n = 20, int dim = 16) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::bernoulli_distribution coin(0.5);
  Matrix x(n, dim);
  truth.clear();
  for (int i = 0; i < n; ++i) {
    const int b = i < 2 ? i : (coin(rng) ? 1 : 0);
    truth.push_back(b);
    for (int j = 0; j < dim; ++j) x(i, j) = (b ? 5.0 : -5.0) + noise(rng);
  }
  return x;
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

ClusterConfig cfg_for(Method m, int k) {
  ClusterConfig c;
  c.method = m;
  c.k = k;
  return c;
}

}  // namespace

TEST_CASE("cluster count rule") {
  CHECK(cluster_count(50) == 5);
  CHECK(cluster_count(1) == 1);
  CHECK(cluster_count(200) == 10);
  CHECK(cluster_count(2) == 1);
  CHECK(cluster_count(10) == 3);
  for (int n = 1; n <= 1000; ++n) {
    const int k = cluster_count(n);
    CHECK(k == std::max(1, static_cast<int>(std::ceil(std::sqrt(n / 2.0)))));
  }
}

TEST_CASE("dissimilarity and redundancy") {
  const std::vector<double> a{1, 0}, b{0, 1};
  CHECK(pairwise_dissimilarity(a, a) == 0.0);
  CHECK(pairwise_dissimilarity(a, b) == 2.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<double> p(16), q(16);
  for (auto& v : p) v = u(rng);
  for (auto& v : q) v = u(rng);
  double ref = 0;
  for (std::size_t i = 0; i < 16; ++i) ref += (p[i] - q[i]) * (p[i] - q[i]);
  CHECK(pairwise_dissimilarity(p, q) == doctest::Approx(ref).epsilon(1e-14));

  CHECK(redundancy_test(p, p, 0.0));
  CHECK(redundancy_test(std::vector<double>{0, 0}, std::vector<double>{3, 4}, 5.0));
  CHECK_FALSE(redundancy_test(std::vector<double>{0, 0}, std::vector<double>{3, 4}, 4.9));
}

TEST_CASE("well separated blobs are recovered") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<int> truth;
    const Matrix x = two_blobs(truth, seed);
    for (Method m : {Method::kKMeans, Method::kAgglomerative}) {
      const auto a = cluster_devices(x, cfg_for(m, 2));
      CHECK(same_partition(a.labels, truth));
      CHECK(a.cluster_count() == 2);
    }
    auto db = cfg_for(Method::kDbscan, 1);
    db.dbscan_eps = 1.0;
    db.dbscan_min_samples = 1;
    CHECK(same_partition(cluster_devices(x, db).labels, truth));
  }
}

TEST_CASE("mean shift separates blobs when the median distance is within-blob") {
  // 15 + 5 rows: within-blob pairs outnumber cross pairs, so the median
  // pairwise distance is a within-blob distance.
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 0.05);
  Matrix x(20, 4);
  std::vector<int> truth;
  for (int i = 0; i < 20; ++i) {
    truth.push_back(i < 15 ? 0 : 1);
    for (int j = 0; j < 4; ++j) x(i, j) = (i < 15 ? 0.0 : 6.0) + noise(rng);
  }
  CHECK(same_partition(cluster_devices(x, cfg_for(Method::kMeanShift, 1)).labels, truth));

  std::vector<int> balanced;
  const Matrix y = two_blobs(balanced, 0);
  CHECK(cluster_devices(y, cfg_for(Method::kMeanShift, 1)).cluster_count() >= 1);
}

TEST_CASE("k = 1 gives one group") {
  std::vector<int> truth;
  const Matrix x = two_blobs(truth, 3);
  for (Method m : {Method::kKMeans, Method::kAgglomerative}) {
    const auto a = cluster_devices(x, cfg_for(m, 1));
    REQUIRE(a.cluster_count() == 1);
    CHECK(a.groups[0].size() == 20);
  }
}

TEST_CASE("dbscan noise becomes singletons") {
  Matrix x(5, 2);
  x << 0, 0, 10, 0, 0, 10, 10, 10, 20, 20;
  auto c = cfg_for(Method::kDbscan, 1);
  c.dbscan_eps = 1.0;
  c.dbscan_min_samples = 2;
  const auto a = cluster_devices(x, c);
  CHECK(a.cluster_count() == 5);
  CHECK(a.labels == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("labels are compact and groups consistent") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix x(30, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  for (Method m : {Method::kKMeans, Method::kAgglomerative, Method::kDbscan, Method::kMeanShift}) {
    auto c = cfg_for(m, 4);
    c.dbscan_eps = 0.4;
    c.dbscan_min_samples = 2;
    const auto a = cluster_devices(x, c);
    REQUIRE(a.labels.size() == 30);
    CHECK(a.labels[0] == 0);
    int next = 0;
    for (int l : a.labels) {
      CHECK(l <= next);
      if (l == next) ++next;
    }
    CHECK(static_cast<std::size_t>(next) == a.cluster_count());
    for (std::size_t g = 0; g < a.groups.size(); ++g) {
      CHECK(std::is_sorted(a.groups[g].begin(), a.groups[g].end()));
      for (int i : a.groups[g]) CHECK(a.labels[static_cast<std::size_t>(i)] == static_cast<int>(g));
    }
  }
}

TEST_CASE("kmeans partition is invariant under row permutation") {
  std::vector<int> truth;
  const Matrix x = two_blobs(truth, 11);
  std::vector<int> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(2);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix px(20, x.cols());
  for (int i = 0; i < 20; ++i) px.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
  const auto a = cluster_devices(x, cfg_for(Method::kKMeans, 2));
  const auto b = cluster_devices(px, cfg_for(Method::kKMeans, 2));
  std::vector<int> back(20);
  for (int i = 0; i < 20; ++i) back[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = b.labels[static_cast<std::size_t>(i)];
  CHECK(same_partition(a.labels, back));
}

TEST_CASE("lloyd inertia never increases") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  Matrix x(60, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  for (auto init : {KMeansInit::kPlusPlus, KMeansInit::kFarthestPoint}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto trace = cluster::detail::lloyd(x, cluster::detail::kmeans_init(x, 4, init, s));
      REQUIRE(!trace.inertia.empty());
      for (std::size_t t = 1; t < trace.inertia.size(); ++t)
        CHECK(trace.inertia[t] <= trace.inertia[t - 1] + 1e-12);
      CHECK(within_cluster_ss(x, trace.labels) == doctest::Approx(trace.inertia.back()));
    }
  }
}

TEST_CASE("seeded clustering is reproducible") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix x(25, 16);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  auto c = cfg_for(Method::kKMeans, 4);
  c.seed = 99;
  CHECK(cluster_devices(x, c).labels == cluster_devices(x, c).labels);
}

TEST_CASE("invalid configurations") {
  Matrix x = Matrix::Zero(4, 2);
  CHECK_THROWS_AS(cluster_devices(x, cfg_for(Method::kGmm, 2)), ConfigError);
  CHECK_THROWS_AS(cluster_devices(x, cfg_for(Method::kSpectral, 2)), ConfigError);
  CHECK_THROWS_AS(cluster_devices(x, cfg_for(Method::kKMeans, 0)), ConfigError);
  CHECK_THROWS_AS(method_from_string("birch"), ConfigError);
  CHECK(method_from_string("mean_shift") == Method::kMeanShift);
  const auto a = cluster_devices(x, cfg_for(Method::kKMeans, 2));
  CHECK(a.labels.size() == 4);
}
