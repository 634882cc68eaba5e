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

namespace qfed::comm {

/// Abstract cost constants for the communication/training time model.
struct CommModelParams {
  double device_cost = 1.0;       // C_d, per participating device
  double aggregation_cost = 1.0;  // C_agg, one server aggregation
  double train_cost = 1.0;        // alpha, per trained model

  void validate() const;
};

struct ModeledTime {
  double comm = 0.0;
  double train = 0.0;
  double total = 0.0;
};

/// Every device trains and communicates: T = alpha*n_d + n_d*C_d.
ModeledTime modeled_time_qfl(int n_devices, const CommModelParams& p);

/// One device per cluster, n_c from the cluster-count rule:
/// T = alpha*n_c + n_c*C_d + C_agg.
ModeledTime modeled_time_mdqfl(int n_devices, const CommModelParams& p);

/// Same formula with an explicit cluster count (e.g. density clustering).
ModeledTime modeled_time_clustered(int n_clusters, const CommModelParams& p);

/// T_total(qfl) / T_total(mdqfl). Throws std::domain_error for a zero denominator.
double performance_improvement(int n_devices, const CommModelParams& p);

/// Communication events in one round: n_d for qfl, n_c + 1 for mdqfl.
int comm_events_qfl(int n_devices);
int comm_events_clustered(int n_clusters);

}  // namespace qfed::comm
