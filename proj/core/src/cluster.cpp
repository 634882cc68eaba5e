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

#include "qfed/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "qfed/error.hpp"
#include "qfed/log.hpp"
#include "qfed/tolerances.hpp"

namespace qfed::cluster {

std::string to_string(Method method) {
  switch (method) {
    case Method::kKMeans: return "kmeans";
    case Method::kAgglomerative: return "agglomerative";
    case Method::kDbscan: return "dbscan";
    case Method::kMeanShift: return "mean_shift";
    case Method::kGmm: return "gmm";
    case Method::kSpectral: return "spectral";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  for (auto m : {Method::kKMeans, Method::kAgglomerative, Method::kDbscan, Method::kMeanShift,
                 Method::kGmm, Method::kSpectral}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("clustering.method: unknown method '" + name + "'");
}

void ClusterConfig::validate() const {
  if (k < 1) throw ConfigError("clustering.k must be >= 1");
  if (!(dbscan_eps > 0.0)) throw ConfigError("clustering.dbscan_eps must be > 0");
  if (dbscan_min_samples < 1) throw ConfigError("clustering.dbscan_min_samples must be >= 1");
  if (kmeans_n_init < 1) throw ConfigError("clustering.kmeans_n_init must be >= 1");
}

int cluster_count(int n_devices) {
  qfed::detail::require(n_devices >= 1, "cluster_count needs n >= 1");
  // smallest k with 2 k^2 >= n, i.e. ceil(sqrt(n / 2))
  int k = 1;
  while (2LL * k * k < n_devices) ++k;
  return k;
}

double pairwise_dissimilarity(std::span<const double> a, std::span<const double> b) {
  qfed::detail::require(a.size() == b.size(), "dissimilarity: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

bool redundancy_test(std::span<const double> a, std::span<const double> b, double epsilon) {
  qfed::detail::require(epsilon >= 0.0, "redundancy_test: epsilon must be >= 0");
  return std::sqrt(pairwise_dissimilarity(a, b)) <= epsilon;
}

namespace {

ClusterAssignment compact(const std::vector<int>& raw) {
  ClusterAssignment out;
  std::map<int, int> remap;
  out.labels.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(raw[i], static_cast<int>(remap.size()));
    out.labels[i] = it->second;
    if (inserted) out.groups.emplace_back();
    out.groups[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(i));
  }
  return out;
}

double sq_dist(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

int nearest_center(const Matrix& points, Eigen::Index i, const Matrix& centers) {
  int best = 0;
  double best_d = sq_dist(points, i, centers, 0);
  for (Eigen::Index c = 1; c < centers.rows(); ++c) {
    const double d = sq_dist(points, i, centers, c);
    if (d < best_d) {  // ties stay with the lower index
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

int clamp_k(int k, Eigen::Index n, Method method) {
  if (k > n) {
    log::warn(to_string(method) + ": k = " + std::to_string(k) + " exceeds " + std::to_string(n) +
              " devices; clamping");
    return static_cast<int>(n);
  }
  return k;
}

std::vector<int> kmeans(const Matrix& points, int k, const ClusterConfig& cfg) {
  const int runs = cfg.kmeans_init == KMeansInit::kFarthestPoint ? 1 : cfg.kmeans_n_init;
  std::vector<int> best_labels;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < runs; ++r) {
    auto trace = detail::lloyd(points, detail::kmeans_init(points, k, cfg.kmeans_init,
                                                           cfg.seed + static_cast<std::uint64_t>(r)));
    if (trace.inertia.back() < best_inertia) {
      best_inertia = trace.inertia.back();
      best_labels = std::move(trace.labels);
    }
  }
  return best_labels;
}

// Ward linkage via Lance-Williams updates on squared Euclidean distances.
std::vector<int> agglomerative_ward(const Matrix& points, int k) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d[i][j] = d[j][i] = sq_dist(points, static_cast<Eigen::Index>(i), points,
                                  static_cast<Eigen::Index>(j));
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> alive(n, true);
  std::vector<int> owner(n);
  for (std::size_t i = 0; i < n; ++i) owner[i] = static_cast<int>(i);

  for (std::size_t clusters = n; clusters > static_cast<std::size_t>(k); --clusters) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (alive[j] && d[i][j] < best) {
          best = d[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    for (std::size_t m = 0; m < n; ++m) {
      if (!alive[m] || m == bi || m == bj) continue;
      const double ni = static_cast<double>(size[bi]);
      const double nj = static_cast<double>(size[bj]);
      const double nm = static_cast<double>(size[m]);
      const double t = ni + nj + nm;
      d[bi][m] = d[m][bi] = ((ni + nm) * d[bi][m] + (nj + nm) * d[bj][m] - nm * d[bi][bj]) / t;
    }
    size[bi] += size[bj];
    alive[bj] = false;
    for (auto& o : owner)
      if (o == static_cast<int>(bj)) o = static_cast<int>(bi);
  }
  return owner;
}

std::vector<int> dbscan(const Matrix& points, double eps, int min_samples) {
  const auto n = static_cast<std::size_t>(points.rows());
  const double eps2 = eps * eps;
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (sq_dist(points, static_cast<Eigen::Index>(i), points, static_cast<Eigen::Index>(j)) <= eps2)
        nbrs[i].push_back(j);  // includes i itself

  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(n, kUnvisited);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    if (nbrs[i].size() < static_cast<std::size_t>(min_samples)) {
      label[i] = kNoise;
      continue;
    }
    const int c = next++;
    label[i] = c;
    std::vector<std::size_t> frontier(nbrs[i].begin(), nbrs[i].end());
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      const std::size_t q = frontier[f];
      if (label[q] == kNoise) label[q] = c;  // border point
      if (label[q] != kUnvisited) continue;
      label[q] = c;
      if (nbrs[q].size() >= static_cast<std::size_t>(min_samples)) {
        frontier.insert(frontier.end(), nbrs[q].begin(), nbrs[q].end());
      }
    }
  }
  // every noise point becomes its own cluster
  for (auto& l : label)
    if (l == kNoise) l = next++;
  return label;
}

std::vector<int> mean_shift(const Matrix& points) {
  const auto n = points.rows();
  std::vector<double> dists;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) dists.push_back(std::sqrt(sq_dist(points, i, points, j)));
  if (dists.empty()) return std::vector<int>(static_cast<std::size_t>(n), 0);
  std::sort(dists.begin(), dists.end());
  const std::size_t mid = dists.size() / 2;
  const double bandwidth = dists.size() % 2 ? dists[mid] : 0.5 * (dists[mid - 1] + dists[mid]);
  if (bandwidth <= 0.0) return std::vector<int>(static_cast<std::size_t>(n), 0);

  const double bw2 = bandwidth * bandwidth;
  Matrix modes = points;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd x = points.row(i);
    for (int it = 0; it < Tolerances::kKMeansMaxIter; ++it) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(points.cols());
      int count = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if ((points.row(j) - x).squaredNorm() <= bw2) {
          sum += points.row(j);
          ++count;
        }
      }
      const Eigen::RowVectorXd next = sum / static_cast<double>(count);
      const double moved = (next - x).norm();
      x = next;
      if (moved < 1e-6 * bandwidth) break;
    }
    modes.row(i) = x;
  }
  // merge modes closer than bandwidth / 2, in point order
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::RowVectorXd> centers;
  for (Eigen::Index i = 0; i < n; ++i) {
    int found = -1;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if ((centers[c] - modes.row(i)).norm() <= bandwidth / 2) {
        found = static_cast<int>(c);
        break;
      }
    }
    if (found < 0) {
      found = static_cast<int>(centers.size());
      centers.emplace_back(modes.row(i));
    }
    label[static_cast<std::size_t>(i)] = found;
  }
  return label;
}

}  // namespace

namespace detail {

Matrix kmeans_init(const Matrix& points, int k, KMeansInit init, std::uint64_t seed) {
  const auto n = points.rows();
  Matrix centers(k, points.cols());
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  Eigen::Index first = 0;
  if (init == KMeansInit::kFarthestPoint) {
    // farthest from the centroid; no randomness so the result is order-independent
    const Eigen::RowVectorXd centroid = points.colwise().mean();
    double best = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (points.row(i) - centroid).squaredNorm();
      if (d > best) {
        best = d;
        first = i;
      }
    }
  }
  std::mt19937_64 rng(seed);
  if (init == KMeansInit::kPlusPlus) {
    first = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
  }
  centers.row(0) = points.row(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], sq_dist(points, i, centers, c - 1));
      total += d2[static_cast<std::size_t>(i)];
    }
    Eigen::Index pick = 0;
    if (init == KMeansInit::kFarthestPoint || total <= 0.0) {
      pick = static_cast<Eigen::Index>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    } else {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        u -= d2[static_cast<std::size_t>(pick)];
        if (u < 0.0) break;
      }
    }
    centers.row(c) = points.row(pick);
  }
  return centers;
}

LloydTrace lloyd(const Matrix& points, Matrix centers) {
  const auto n = points.rows();
  const auto k = centers.rows();
  LloydTrace trace;
  trace.labels.assign(static_cast<std::size_t>(n), 0);
  for (int it = 0; it < Tolerances::kKMeansMaxIter; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      trace.labels[static_cast<std::size_t>(i)] = nearest_center(points, i, centers);
    }
    trace.inertia.push_back(within_cluster_ss(points, trace.labels));

    Matrix next = centers;
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    next.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = trace.labels[static_cast<std::size_t>(i)];
      next.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    double shift = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        next.row(c) = centers.row(c);  // empty cluster keeps its center
      } else {
        next.row(c) /= counts[static_cast<std::size_t>(c)];
      }
      shift = std::max(shift, (next.row(c) - centers.row(c)).norm());
    }
    centers = std::move(next);
    if (shift < Tolerances::kKMeansShift) break;
  }
  return trace;
}

}  // namespace detail

double within_cluster_ss(const Matrix& points, std::span<const int> labels) {
  qfed::detail::require(labels.size() == static_cast<std::size_t>(points.rows()),
                        "within_cluster_ss: label count mismatch");
  std::map<int, std::pair<Eigen::RowVectorXd, int>> sums;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    auto [it, inserted] = sums.try_emplace(labels[static_cast<std::size_t>(i)],
                                           Eigen::RowVectorXd::Zero(points.cols()), 0);
    it->second.first += points.row(i);
    ++it->second.second;
  }
  double ss = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const auto& [sum, count] = sums.at(labels[static_cast<std::size_t>(i)]);
    ss += (points.row(i) - sum / count).squaredNorm();
  }
  return ss;
}

ClusterAssignment cluster_devices(const Matrix& points, const ClusterConfig& cfg) {
  cfg.validate();
  qfed::detail::require(points.rows() >= 1, "cluster_devices needs at least one device");
  switch (cfg.method) {
    case Method::kKMeans:
      return compact(kmeans(points, clamp_k(cfg.k, points.rows(), cfg.method), cfg));
    case Method::kAgglomerative:
      return compact(agglomerative_ward(points, clamp_k(cfg.k, points.rows(), cfg.method)));
    case Method::kDbscan:
      return compact(dbscan(points, cfg.dbscan_eps, cfg.dbscan_min_samples));
    case Method::kMeanShift:
      return compact(mean_shift(points));
    case Method::kGmm:
    case Method::kSpectral:
      break;
  }
  throw ConfigError("clustering.method '" + to_string(cfg.method) +
                    "' is a reserved extension point and has no implementation");
}

}  // namespace qfed::cluster
