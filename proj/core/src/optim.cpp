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

#include "qfed/optim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qfed/error.hpp"

namespace qfed::opt {

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::kCobyla: return "cobyla";
    case Kind::kGd: return "gd";
    case Kind::kAdam: return "adam";
    case Kind::kAqgd: return "aqgd";
  }
  return "?";
}

std::string to_string(RadiusSchedule schedule) {
  return schedule == RadiusSchedule::kAdaptive ? "adaptive" : "inverse_t";
}

Kind kind_from_string(const std::string& name) {
  if (name == "cobyla") return Kind::kCobyla;
  if (name == "gd") return Kind::kGd;
  if (name == "adam") return Kind::kAdam;
  if (name == "aqgd") return Kind::kAqgd;
  throw ConfigError("optimizer.kind: unknown optimizer '" + name + "'");
}

RadiusSchedule schedule_from_string(const std::string& name) {
  if (name == "adaptive") return RadiusSchedule::kAdaptive;
  if (name == "inverse_t") return RadiusSchedule::kInverseT;
  throw ConfigError("optimizer.radius_schedule: unknown schedule '" + name + "'");
}

void OptimizerConfig::validate() const {
  if (maxiter < 1) throw ConfigError("optimizer.maxiter must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("optimizer.learning_rate must be > 0");
  if (!(rho_begin > 0.0)) throw ConfigError("optimizer.rho_begin must be > 0");
  if (!(rho_end > 0.0)) throw ConfigError("optimizer.rho_end must be > 0");
  if (!(rho_end < rho_begin)) throw ConfigError("optimizer.rho_end must be < rho_begin");
}

std::size_t evaluation_budget(const OptimizerConfig& cfg, std::size_t dim) {
  const auto iters = static_cast<std::size_t>(cfg.maxiter);
  return cfg.kind == Kind::kCobyla ? iters * (dim + 2) : iters * (2 * dim + 1);
}

namespace {

using Vec = std::vector<double>;

struct BudgetExhausted {};

// Counts calls, enforces the budget and rejects non-finite values.
class CountedObjective {
 public:
  CountedObjective(const Objective& f, std::size_t budget) : f_(f), budget_(budget) {}

  double operator()(std::span<const double> x) {
    if (count_ >= budget_) throw BudgetExhausted{};
    ++count_;
    const double v = f_(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "objective returned non-finite value " << v << " at point [";
      for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
      os << "]";
      throw OptimizationError(os.str(), Vec(x.begin(), x.end()));
    }
    return v;
  }

  bool can_afford(std::size_t n) const { return count_ + n <= budget_; }
  void charge(std::size_t n) { count_ += n; }
  std::size_t count() const { return count_; }

 private:
  const Objective& f_;
  std::size_t budget_;
  std::size_t count_ = 0;
};

double distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

struct Vertex {
  Vec x;
  double f;
};

// Linear-interpolation trust-region method on a simplex of dim+1 points.
class Cobyla {
 public:
  Cobyla(CountedObjective& f, std::span<const double> x0, const OptimizerConfig& cfg)
      : f_(f), cfg_(cfg), n_(x0.size()), radius_(cfg.rho_begin) {
    Vec start(x0.begin(), x0.end());
    simplex_.push_back({start, f_(start)});
    for (std::size_t i = 0; i < n_; ++i) {
      Vec v = start;
      v[i] += radius_;
      simplex_.push_back({v, f_(v)});
    }
  }

  void run(OptRunResult& out) {
    try {
      for (int t = 1; t <= cfg_.maxiter; ++t) {
        if (cfg_.radius_schedule == RadiusSchedule::kInverseT) {
          radius_ = cfg_.rho_begin / static_cast<double>(t);
        }
        if (radius_ < cfg_.rho_end) break;
        out.radius_history.push_back(radius_);
        iterate();
        out.value_history.push_back(simplex_[best()].f);
      }
    } catch (const BudgetExhausted&) {
      // the partial iteration still moved the incumbent
      if (out.value_history.size() < out.radius_history.size()) {
        out.value_history.push_back(simplex_[best()].f);
      }
    }
    const auto& b = simplex_[best()];
    out.best_params = b.x;
    out.best_value = b.f;
  }

 private:
  std::size_t best() const {
    std::size_t b = 0;
    for (std::size_t i = 1; i < simplex_.size(); ++i) {
      if (simplex_[i].f < simplex_[b].f) b = i;
    }
    return b;
  }

  // Gradient of the linear interpolant through the simplex, or nullopt if
  // the vertex differences do not span the space.
  std::optional<Eigen::VectorXd> model_gradient(std::size_t b) const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd rhs(n);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < simplex_.size(); ++i) {
      if (i == b) continue;
      for (Eigen::Index j = 0; j < n; ++j) A(row, j) = simplex_[i].x[j] - simplex_[b].x[j];
      rhs(row) = simplex_[i].f - simplex_[b].f;
      ++row;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < n) return std::nullopt;
    return qr.solve(rhs);
  }

  std::size_t farthest_from(const Vec& x, std::size_t exclude) const {
    std::size_t far = exclude == 0 ? 1 : 0;
    for (std::size_t i = 0; i < simplex_.size(); ++i) {
      if (i == exclude) continue;
      if (distance(simplex_[i].x, x) > distance(simplex_[far].x, x)) far = i;
    }
    return far;
  }

  // Replaces vertex `drop` with best + radius * e_j, choosing the coordinate
  // direction least represented by the remaining vertex differences.
  void improve_geometry(std::size_t b, std::size_t drop) {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd kept(n, n - 1);
    Eigen::Index col = 0;
    for (std::size_t i = 0; i < simplex_.size(); ++i) {
      if (i == b || i == drop) continue;
      for (Eigen::Index j = 0; j < n; ++j) kept(j, col) = simplex_[i].x[j] - simplex_[b].x[j];
      ++col;
    }
    Eigen::Index dir = 0;
    if (n > 1) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(kept);
      const Eigen::Index r = qr.rank();
      Eigen::MatrixXd q = qr.householderQ();
      double best_resid = -1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double proj = r > 0 ? q.row(j).head(r).squaredNorm() : 0.0;
        const double resid = 1.0 - proj;
        if (resid > best_resid + 1e-12) {
          best_resid = resid;
          dir = j;
        }
      }
    }
    Vec v = simplex_[b].x;
    v[static_cast<std::size_t>(dir)] += radius_;
    const double fv = f_(v);
    simplex_[drop] = {std::move(v), fv};
  }

  void iterate() {
    const std::size_t b = best();
    const auto g = model_gradient(b);
    if (!g || g->norm() == 0.0) {
      improve_geometry(b, farthest_from(simplex_[b].x, b));
      return;
    }
    Vec trial = simplex_[b].x;
    const Eigen::VectorXd step = -radius_ * (*g / g->norm());
    for (std::size_t j = 0; j < n_; ++j) trial[j] += step(static_cast<Eigen::Index>(j));
    const double ft = f_(trial);
    if (ft < simplex_[b].f) {
      const std::size_t drop = farthest_from(trial, b);
      simplex_[drop] = {std::move(trial), ft};
      return;
    }
    if (cfg_.radius_schedule == RadiusSchedule::kAdaptive) radius_ *= 0.5;
    improve_geometry(b, farthest_from(simplex_[b].x, b));
  }

  CountedObjective& f_;
  const OptimizerConfig& cfg_;
  std::size_t n_;
  double radius_;
  std::vector<Vertex> simplex_;
};

void run_gradient_method(CountedObjective& f, std::span<const double> x0,
                         const OptimizerConfig& cfg, const GradientFn& grad, OptRunResult& out) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  const std::size_t n = x0.size();
  Vec x(x0.begin(), x0.end());
  Vec m(n, 0.0), v(n, 0.0);
  out.best_value = std::numeric_limits<double>::infinity();

  const Objective counted = [&f](std::span<const double> p) { return f(p); };

  for (int t = 1; t <= cfg.maxiter; ++t) {
    if (!f.can_afford(2 * n + 1)) break;
    const double fx = f(x);
    out.value_history.push_back(fx);
    if (fx < out.best_value) {
      out.best_value = fx;
      out.best_params = x;
    }

    Vec g;
    if (cfg.kind == Kind::kAqgd) {
      if (grad) {
        f.charge(2 * n);
        g = grad(x);
      } else {
        g = gradient(counted, x, GradientMethod::kParameterShift);
      }
    } else {
      g = gradient(counted, x, GradientMethod::kCentralFd);
    }

    if (cfg.kind == Kind::kAdam) {
      const double c1 = 1.0 - std::pow(kBeta1, t);
      const double c2 = 1.0 - std::pow(kBeta2, t);
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
        x[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) x[i] -= cfg.learning_rate * g[i];
    }
  }
}

}  // namespace

std::vector<double> gradient(const Objective& objective, std::span<const double> x,
                             GradientMethod method, double h) {
  const double shift = method == GradientMethod::kParameterShift ? std::numbers::pi / 2 : h;
  const double scale = method == GradientMethod::kParameterShift ? 0.5 : 1.0 / (2.0 * h);
  Vec probe(x.begin(), x.end());
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = probe[i];
    probe[i] = xi + shift;
    const double fp = objective(probe);
    probe[i] = xi - shift;
    const double fm = objective(probe);
    probe[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw OptimizationError("non-finite objective at gradient probe for coordinate " +
                                  std::to_string(i),
                              probe);
    }
    g[i] = (fp - fm) * scale;
  }
  return g;
}

OptRunResult minimize(const Objective& objective, std::span<const double> x0,
                      const OptimizerConfig& cfg, const GradientFn& grad) {
  cfg.validate();
  detail::require(!x0.empty(), "minimize needs at least one dimension");
  CountedObjective f(objective, evaluation_budget(cfg, x0.size()));
  OptRunResult out;
  if (cfg.kind == Kind::kCobyla) {
    Cobyla solver(f, x0, cfg);
    solver.run(out);
  } else {
    run_gradient_method(f, x0, cfg, grad, out);
  }
  out.evaluations = f.count();
  return out;
}

bool regret_upper_bound_check(const OptRunResult& result, double lipschitz_L, double f_star) {
  detail::require(!result.radius_history.empty(), "regret check needs a recorded radius history");
  detail::require(result.radius_history.size() == result.value_history.size(),
                  "radius and value histories differ in length");
  double regret = 0.0;
  double radius_sum = 0.0;
  for (std::size_t t = 0; t < result.value_history.size(); ++t) {
    regret += result.value_history[t] - f_star;
    radius_sum += result.radius_history[t];
  }
  return regret <= lipschitz_L * radius_sum;
}

}  // namespace qfed::opt
