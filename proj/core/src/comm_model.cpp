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

#include "qfed/comm_model.hpp"

#include <stdexcept>

#include "qfed/cluster.hpp"
#include "qfed/error.hpp"

namespace qfed::comm {

void CommModelParams::validate() const {
  if (device_cost < 0) throw ConfigError("comm.C_d must be >= 0");
  if (aggregation_cost < 0) throw ConfigError("comm.C_agg must be >= 0");
  if (train_cost < 0) throw ConfigError("comm.alpha must be >= 0");
}

ModeledTime modeled_time_qfl(int n_devices, const CommModelParams& p) {
  detail::require(n_devices >= 1, "modeled_time_qfl needs n_d >= 1");
  const double n = n_devices;
  ModeledTime t;
  t.comm = n * p.device_cost;
  t.train = p.train_cost * n;
  t.total = t.train + t.comm;
  return t;
}

ModeledTime modeled_time_clustered(int n_clusters, const CommModelParams& p) {
  detail::require(n_clusters >= 1, "modeled time needs n_c >= 1");
  const double n = n_clusters;
  ModeledTime t;
  t.comm = n * p.device_cost + p.aggregation_cost;
  t.train = p.train_cost * n;
  t.total = t.train + t.comm;
  return t;
}

ModeledTime modeled_time_mdqfl(int n_devices, const CommModelParams& p) {
  detail::require(n_devices >= 1, "modeled_time_mdqfl needs n_d >= 1");
  return modeled_time_clustered(cluster::cluster_count(n_devices), p);
}

double performance_improvement(int n_devices, const CommModelParams& p) {
  const double denom = modeled_time_mdqfl(n_devices, p).total;
  if (denom == 0.0) throw std::domain_error("performance_improvement: mdqfl total time is zero");
  return modeled_time_qfl(n_devices, p).total / denom;
}

int comm_events_qfl(int n_devices) { return n_devices; }
int comm_events_clustered(int n_clusters) { return n_clusters + 1; }

}  // namespace qfed::comm
