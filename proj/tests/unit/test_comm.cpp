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

#include <stdexcept>

#include "doctest.h"
#include "qfed/cluster.hpp"
#include "qfed/comm_model.hpp"

using namespace qfed;
using namespace qfed::comm;

TEST_CASE("qfl modeled time") {
  const CommModelParams unit;
  const auto t = modeled_time_qfl(50, unit);
  CHECK(t.comm == 50.0);
  CHECK(t.train == 50.0);
  CHECK(t.total == 100.0);
  const auto z = modeled_time_qfl(7, {0.0, 1.0, 0.0});
  CHECK(z.comm == 0.0);
  CHECK(z.train == 0.0);
  CHECK(z.total == 0.0);
  const auto one = modeled_time_qfl(1, {2.0, 5.0, 3.0});
  CHECK(one.total == 5.0);
}

TEST_CASE("mdqfl modeled time") {
  const CommModelParams unit;
  const auto t = modeled_time_mdqfl(50, unit);
  CHECK(t.comm == 6.0);
  CHECK(t.train == 5.0);
  CHECK(t.total == 11.0);
  CHECK(cluster::cluster_count(2) == 1);
  CHECK(modeled_time_mdqfl(2, unit).total == 3.0);
  CHECK(modeled_time_mdqfl(40, {0.0, 4.0, 0.0}).total == 4.0);
  CHECK(modeled_time_clustered(5, unit).total == 11.0);
}

TEST_CASE("performance improvement") {
  const CommModelParams unit;
  CHECK(std::abs(performance_improvement(50, unit) - 100.0 / 11.0) < 1e-12);
  CHECK(performance_improvement(1, {1.0, 0.0, 1.0}) == 1.0);
  CHECK_THROWS_AS(performance_improvement(5, {0.0, 0.0, 0.0}), std::domain_error);

  for (const CommModelParams& p : {unit, CommModelParams{2.0, 3.0, 0.5}, CommModelParams{0.1, 7.0, 4.0}}) {
    for (int n = 4; n <= 500; ++n) {
      const double nc = cluster::cluster_count(n);
      const double identity = (p.train_cost + p.device_cost) * n /
                              ((p.train_cost + p.device_cost) * nc + p.aggregation_cost);
      REQUIRE(performance_improvement(n, p) == doctest::Approx(identity).epsilon(1e-12));
      if (nc < n && p.aggregation_cost < (n - nc) * (p.train_cost + p.device_cost))
        REQUIRE(performance_improvement(n, p) > 1.0);
    }
  }
}

TEST_CASE("event counts") {
  CHECK(comm_events_qfl(50) == 50);
  CHECK(comm_events_clustered(5) == 6);
}

TEST_CASE("negative costs are rejected") {
  CHECK_THROWS(CommModelParams{-1.0, 1.0, 1.0}.validate());
}
