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

#include <benchmark/benchmark.h>

#include <random>

#include "qfed/cluster.hpp"
#include "qfed/statevec.hpp"
#include "qfed/vqc.hpp"

using namespace qfed;

static void BM_LayeredCircuit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  sv::Circuit c;
  for (int layer = 0; layer < 10; ++layer) {
    for (std::size_t q = 0; q < n; ++q) c.push_back(sv::Gate::ry(q, 0.1 * static_cast<double>(q + 1)));
    for (std::size_t q = 0; q + 1 < n; ++q) c.push_back(sv::Gate::cx(q, q + 1));
  }
  for (auto _ : state) {
    auto s = sv::init_zero_state(n);
    s.apply(c);
    benchmark::DoNotOptimize(s.amplitudes().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.size()));
}
BENCHMARK(BM_LayeredCircuit)->DenseRange(4, 12, 4);

static void BM_ClassifierLoss(benchmark::State& state) {
  vqc::Classifier clf({4, 1}, {4, 3}, 2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  LabeledDataset d;
  d.features.resize(state.range(0), 4);
  for (Eigen::Index i = 0; i < d.features.size(); ++i) d.features.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) d.labels.push_back(static_cast<int>(i % 2));
  const auto p = clf.initial_params();
  for (auto _ : state) benchmark::DoNotOptimize(clf.loss(p, d));
}
BENCHMARK(BM_ClassifierLoss)->Arg(32)->Arg(128);

static void BM_KMeansDevices(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 1);
  Matrix x(state.range(0), 16);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  cluster::ClusterConfig cfg;
  cfg.k = cluster::cluster_count(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(cluster::cluster_devices(x, cfg).labels.data());
}
BENCHMARK(BM_KMeansDevices)->Arg(20)->Arg(200);
BENCHMARK_MAIN();
