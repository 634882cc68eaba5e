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

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "qfed/config.hpp"
#include "qfed/log.hpp"
#include "qfed/orchestrator.hpp"

using namespace qfed;
using namespace qfed::fl;

namespace {

struct QuietLog {
  log::Sink previous = log::set_sink([](log::Level, const std::string&) {});
  ~QuietLog() { log::set_sink(previous); }
};

LabeledDataset random_data(std::mt19937_64& rng, int rows) {
  std::uniform_real_distribution<double> u(0, 1);
  LabeledDataset d;
  d.features.resize(rows, 2);
  for (int i = 0; i < rows; ++i) {
    d.features(i, 0) = u(rng);
    d.features(i, 1) = u(rng);
    d.labels.push_back(d.features(i, 0) > d.features(i, 1) ? 1 : 0);
  }
  return d;
}

// Two-qubit classifier, devices with small random shards.
Environment tiny_env(int n_devices, std::uint64_t seed, bool identical_shards = false) {
  std::mt19937_64 rng(seed);
  Environment env{vqc::Classifier({2, 1}, {2, 1}, 2), {}, {}, {}, 0};
  const auto shared_train = random_data(rng, 8);
  const auto shared_test = random_data(rng, 2);
  for (int i = 0; i < n_devices; ++i) {
    DeviceState d;
    d.id = i;
    d.train = identical_shards ? shared_train : random_data(rng, 8);
    d.test = identical_shards ? shared_test : random_data(rng, 2);
    d.params = env.classifier.initial_params();
    env.devices.push_back(std::move(d));
  }
  env.validation = random_data(rng, 10);
  env.test = random_data(rng, 10);
  return env;
}

ExperimentConfig tiny_cfg(Protocol p, int n_devices, int rounds) {
  ExperimentConfig cfg;
  cfg.protocol = p;
  cfg.n_devices = n_devices;
  cfg.rounds = rounds;
  cfg.optimizer.maxiter = 3;
  return cfg;
}

ModelParams filled(double v, std::size_t n = 16) { return ModelParams(n, v); }

}  // namespace

TEST_CASE("combine") {
  const std::vector<ModelParams> one{{1.5, -2.0}};
  CHECK(combine(one) == one[0]);
  const std::vector<ModelParams> two{{1, 1}, {0, 0}};
  CHECK(combine(two) == ModelParams{0.5, 0.5});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<ModelParams> three(3, ModelParams(16));
  for (auto& m : three)
    for (auto& v : m) v = u(rng);
  const auto got = combine(three);
  for (std::size_t i = 0; i < 16; ++i)
    CHECK(got[i] == doctest::Approx((three[0][i] + three[1][i] + three[2][i]) / 3.0).epsilon(1e-15));
  CHECK(combine_weighted(two, std::vector<double>{3.0, 1.0}) == ModelParams{0.75, 0.75});
  CHECK_THROWS(combine(std::vector<ModelParams>{}));
}

TEST_CASE("representative selection") {
  std::vector<DeviceState> d(3);
  const double losses[] = {0.5, 0.2, 0.9};
  for (int i = 0; i < 3; ++i) {
    d[static_cast<std::size_t>(i)].id = 10 + i;
    d[static_cast<std::size_t>(i)].latest_loss = losses[i];
  }
  std::vector<const DeviceState*> group{&d[0], &d[1], &d[2]};
  std::mt19937_64 rng(0);
  CHECK(select_representative(group, SelectionKind::kLossArgmin, rng) == 11);
  std::vector<const DeviceState*> single{&d[2]};
  CHECK(select_representative(single, SelectionKind::kLossArgmin, rng) == 12);
  CHECK(select_representative(single, SelectionKind::kUniformRandom, rng) == 12);

  d[0].latest_loss = 0.2;
  CHECK(select_representative(group, SelectionKind::kLossArgmin, rng) == 10);

  std::vector<DeviceState> four(4);
  for (int i = 0; i < 4; ++i) four[static_cast<std::size_t>(i)].id = i;
  std::vector<const DeviceState*> g4{&four[0], &four[1], &four[2], &four[3]};
  std::vector<int> counts(4, 0);
  std::mt19937_64 r2(12345);
  for (int t = 0; t < 10000; ++t) ++counts[static_cast<std::size_t>(select_representative(g4, SelectionKind::kUniformRandom, r2))];
  for (int c : counts) {
    CHECK(c / 10000.0 >= 0.23);
    CHECK(c / 10000.0 <= 0.27);
  }
}

TEST_CASE("training start for the representative") {
  QuietLog quiet;
  const auto g = filled(1.0), c = filled(0.0);
  CHECK(train_model_for_selected({0, 0, 0}, g, c) == g);
  CHECK(train_model_for_selected({1, 0, 0}, g, g) == g);
  CHECK(train_model_for_selected({1, 0, 0}, g, c) == filled(0.5));
  CHECK(train_model_for_selected({1, 0, 0}, g, std::nullopt) == g);
}

TEST_CASE("cluster member update") {
  std::vector<DeviceState> d(3);
  std::vector<DeviceState*> members{&d[0], &d[1], &d[2]};
  const std::vector<ModelParams> old{{0.0}, {1.0}, {2.0}};

  update_cluster_members({0, 0, 0}, members, old, {3.0}, {0.0});
  for (auto& x : d) CHECK(x.params == ModelParams{3.0});

  update_cluster_members({0, 1, 0}, members, old, {1.0}, {0.0});
  CHECK(d[1].params == ModelParams{1.0});
  CHECK(d[0].params == ModelParams{0.5});

  update_cluster_members({0, 2, 0}, members, old, {3.0}, {0.0});
  CHECK(d[0].params == ModelParams{1.0});
  CHECK(d[2].params[0] == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("aggregation") {
  std::vector<DeviceState> one(1);
  one[0].params = {0.2, 0.4};
  const std::vector<ModelParams> cm{{1.0, 1.0}};
  CHECK(aggregate(one, cm).global == one[0].params);

  std::vector<DeviceState> two(2);
  two[0].params = filled(0.0);
  two[1].params = filled(1.0);
  CHECK(aggregate(two, cm).global == filled(0.5));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<DeviceState> five(5);
  for (auto& d : five) {
    d.params.resize(16);
    for (auto& v : d.params) v = u(rng);
  }
  const auto agg = aggregate(five, cm);
  for (std::size_t i = 0; i < 16; ++i) {
    double s = 0;
    for (const auto& d : five) s += d.params[i];
    CHECK(agg.global[i] == doctest::Approx(s / 5.0).epsilon(1e-14));
  }
  CHECK(agg.cluster_mean == cm[0]);
}

TEST_CASE("server test model") {
  const auto g = filled(1.0), c = filled(0.0);
  CHECK(server_test_model({0, 0, 0}, g, c) == g);
  CHECK(server_test_model({0, 0, 2}, g, c) == c);
  CHECK(server_test_model({0, 0, 1}, g, c) == filled(0.5));
}

TEST_CASE("initial round trains every device once") {
  auto env = tiny_env(3, 1);
  const auto cfg = tiny_cfg(Protocol::kMdqfl, 3, 1);
  for (const auto& d : env.devices) CHECK(d.params == env.devices[0].params);
  initial_round(env.devices, env.classifier, cfg);
  for (const auto& d : env.devices) CHECK(d.trainings == 1);
  CHECK(env.devices[0].params != env.devices[1].params);
  CHECK_FALSE(std::isnan(env.devices[0].latest_loss));
}

TEST_CASE("mdqfl training-count law and event accounting") {
  QuietLog quiet;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto cfg = tiny_cfg(Protocol::kMdqfl, 10, 3);
    const auto res = run_mdqfl(cfg, tiny_env(10, seed));
    REQUIRE(res.rounds.size() == 3);
    int expected = 10;
    CHECK(res.rounds[0].trainings == 10);
    CHECK(res.rounds[0].comm_events == 10);
    for (std::size_t r = 1; r < 3; ++r) {
      const int k = res.rounds[r].clusters;
      CHECK(k == 3);
      CHECK(res.rounds[r].trainings == k);
      CHECK(res.rounds[r].comm_events == k + 1);
      CHECK(res.rounds[r].modeled_total == 2.0 * k + 1.0);
      expected += k;
    }
    CHECK(res.total_trainings == expected);
    int per_device = 0;
    for (const auto& d : res.devices) per_device += d.trainings;
    CHECK(per_device == expected);
  }
}

TEST_CASE("density clustering drives the per-round count") {
  QuietLog quiet;
  auto cfg = tiny_cfg(Protocol::kMdqfl, 6, 3);
  cfg.clustering.method = cluster::Method::kDbscan;
  cfg.clustering.dbscan_eps = 1e-9;
  cfg.clustering.dbscan_min_samples = 2;
  const auto res = run_mdqfl(cfg, tiny_env(6, 4));
  for (std::size_t r = 1; r < res.rounds.size(); ++r) {
    CHECK(res.rounds[r].clusters == static_cast<int>(std::set<int>(res.cluster_labels[r].begin(), res.cluster_labels[r].end()).size()));
    CHECK(res.rounds[r].comm_events == res.rounds[r].clusters + 1);
  }
}

TEST_CASE("policies change the server trajectory") {
  QuietLog quiet;
  auto a = tiny_cfg(Protocol::kMdqfl, 6, 3);
  auto b = a;
  b.policy = {1, 1, 1};
  const auto ra = run_mdqfl(a, tiny_env(6, 5));
  const auto rb = run_mdqfl(b, tiny_env(6, 5));
  CHECK(ra.server_models[0] == rb.server_models[0]);
  CHECK(ra.server_models.back() != rb.server_models.back());
}

TEST_CASE("identical devices stay identical") {
  QuietLog quiet;
  for (PersonalizationPolicy p : {PersonalizationPolicy{0, 0, 0}, PersonalizationPolicy{1, 2, 1}}) {
    auto cfg = tiny_cfg(Protocol::kMdqfl, 5, 4);
    cfg.fixed_k = 1;
    cfg.policy = p;
    const auto res = run_mdqfl(cfg, tiny_env(5, 6, true));
    for (const auto& d : res.devices) CHECK(d.params == res.devices[0].params);
    for (std::size_t r = 1; r < res.rounds.size(); ++r) CHECK(res.rounds[r].clusters == 1);
  }
}

TEST_CASE("qfl baseline") {
  const auto cfg = tiny_cfg(Protocol::kQfl, 10, 3);
  const auto res = run_qfl_baseline(cfg, tiny_env(10, 7));
  CHECK(res.total_trainings == 30);
  for (const auto& r : res.rounds) {
    CHECK(r.trainings == 10);
    CHECK(r.comm_events == 10);
    CHECK(r.modeled_total == 20.0);
  }
  for (const auto& d : res.devices) CHECK(d.params == res.server.global);

  auto env = tiny_env(1, 8);
  const auto single_cfg = tiny_cfg(Protocol::kQfl, 1, 1);
  const auto direct = train_device(env.devices[0], env.classifier.initial_params(), env.classifier,
                                   single_cfg.optimizer);
  const auto single = run_qfl_baseline(single_cfg, env);
  CHECK(single.server.global == direct.params);
}

TEST_CASE("results do not depend on the worker count") {
  QuietLog quiet;
  for (Protocol p : {Protocol::kMdqfl, Protocol::kQfl}) {
    auto c1 = tiny_cfg(p, 8, 3);
    auto c4 = c1;
    c4.workers = 4;
    const auto r1 = p == Protocol::kMdqfl ? run_mdqfl(c1, tiny_env(8, 9)) : run_qfl_baseline(c1, tiny_env(8, 9));
    const auto r4 = p == Protocol::kMdqfl ? run_mdqfl(c4, tiny_env(8, 9)) : run_qfl_baseline(c4, tiny_env(8, 9));
    CHECK(r1.server_models == r4.server_models);
    for (std::size_t r = 0; r < r1.rounds.size(); ++r) {
      CHECK(r1.rounds[r].server_val_loss == r4.rounds[r].server_val_loss);
      CHECK(r1.rounds[r].avg_device_train_acc == r4.rounds[r].avg_device_train_acc);
    }
  }
}

TEST_CASE("training failures carry round and device context") {
  auto env = tiny_env(3, 10);
  env.devices[2].train.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    run_qfl_baseline(tiny_cfg(Protocol::kQfl, 3, 2), env);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("round 1") != std::string::npos);
    CHECK(what.find("device 2") != std::string::npos);
  }
}

TEST_CASE("pipeline environment from a synthetic config") {
  QuietLog quiet;
  auto cfg = tiny_cfg(Protocol::kMdqfl, 10, 2);
  data::SyntheticSpec spec;
  spec.dim = 16;
  cfg.dataset.source = spec;
  cfg.dataset.n_train = 300;
  cfg.dataset.n_test = 60;
  const auto env = prepare_environment(cfg);
  CHECK(env.devices.size() == 10);
  CHECK(env.classifier.parameter_count() == 16);
  CHECK(env.classifier.n_classes() == 10);
  CHECK(env.validation.size() == 60);
  CHECK(env.test.size() == 60);
  CHECK(env.validation.features.minCoeff() >= 0.0);
  CHECK(env.test.features.maxCoeff() <= 1.0);
  for (const auto& d : env.devices) {
    std::set<int> labels(d.train.labels.begin(), d.train.labels.end());
    labels.insert(d.test.labels.begin(), d.test.labels.end());
    CHECK(labels.size() <= 2);
  }
}
