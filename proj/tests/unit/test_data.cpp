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
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "qfed/data.hpp"
#include "qfed/error.hpp"
#include "qfed/log.hpp"

using namespace qfed;
using namespace qfed::data;

namespace {

const std::filesystem::path kSource = QFED_SOURCE_DIR;

struct CapturedWarnings {
  std::vector<std::string> messages;
  log::Sink previous;
  CapturedWarnings() {
    previous = log::set_sink([this](log::Level l, const std::string& m) {
      if (l == log::Level::kWarn) messages.push_back(m);
    });
  }
  ~CapturedWarnings() { log::set_sink(previous); }
};

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

// Rows labelled 0..9, `per_label` rows each.
Matrix labelled_rows(int per_label, std::vector<int>& labels) {
  Matrix x(10 * per_label, 2);
  labels.clear();
  for (int i = 0; i < 10 * per_label; ++i) {
    x(i, 0) = i;
    x(i, 1) = i % 10;
    labels.push_back(i % 10);
  }
  return x;
}

}  // namespace

TEST_CASE("synthetic generator") {
  SyntheticSpec spec;
  const auto a = load_dataset(spec, 1000, 50, 7);
  CHECK(a.train.features.rows() == 1000);
  CHECK(a.train.features.cols() == 784);
  CHECK(a.test.size() == 50);
  CHECK(*std::min_element(a.train.labels.begin(), a.train.labels.end()) == 0);
  CHECK(*std::max_element(a.train.labels.begin(), a.train.labels.end()) == 9);
  const auto b = load_dataset(spec, 1000, 50, 7);
  CHECK(a.train.features == b.train.features);
  CHECK(a.train.labels == b.train.labels);
  const auto c = load_dataset(spec, 1000, 50, 8);
  CHECK(a.train.features != c.train.features);

  SyntheticSpec sep;
  sep.shape = SyntheticSpec::Shape::kSeparable;
  sep.dim = 4;
  const auto s = load_dataset(sep, 200, 20, 1);
  CHECK(std::set<int>(s.train.labels.begin(), s.train.labels.end()) == std::set<int>{0, 1});
  CHECK(s.train.features.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("digit csv keeps the first n rows") {
  const CsvSpec spec{kSource / "data/digits_train.csv", kSource / "data/digits_test.csv"};
  const auto full = read_csv(spec.train_path);
  REQUIRE(full.size() >= 1000);
  const auto d = load_dataset(spec, 1000, 100, 0);
  CHECK(d.train.size() == 1000);
  CHECK(d.train.features == full.features.topRows(1000));
  CHECK(std::equal(d.train.labels.begin(), d.train.labels.end(), full.labels.begin()));

  CapturedWarnings w;
  const auto all = load_dataset(spec, full.size() + 10, 100, 0);
  CHECK(all.train.size() == full.size());
  CHECK(w.messages.size() == 1);

  CHECK_THROWS_AS(read_csv(kSource / "data/does_not_exist.csv"), LoadError);
}

TEST_CASE("standardize") {
  const auto s = standardize(column({1, 2, 3}), column({2}));
  CHECK(s.train(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(std::abs(s.train(1, 0)) < 1e-12);
  CHECK(s.train(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-12));

  const auto c = standardize(column({4, 4, 4}), column({5}));
  CHECK(c.train.isZero());
  CHECK(c.test.isZero());

  const auto shifted = standardize(column({1, 2, 3}), column({10, 11}));
  CHECK(shifted.test(0, 0) == doctest::Approx((10 - 2) / std::sqrt(2.0 / 3.0)));
  CHECK(shifted.test(1, 0) == doctest::Approx((11 - 2) / std::sqrt(2.0 / 3.0)));
}

TEST_CASE("pca") {
  SUBCASE("points on y = x") {
    Matrix x(4, 2);
    x << 0, 0, 1, 1, 2, 2, 3, 3;
    const auto m = pca_fit(x, 2);
    CHECK(std::abs(m.components(0, 0) - 1 / std::sqrt(2.0)) < 1e-10);
    CHECK(std::abs(m.components(0, 1) - 1 / std::sqrt(2.0)) < 1e-10);
    CHECK(std::abs(m.explained_variance(1)) < 1e-10);
  }
  SUBCASE("full rotation preserves variance") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0, 1);
    Matrix x(500, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
    const auto m = pca_fit(x, 3);
    const Matrix z = pca_transform(m, x);
    const auto total_var = [](const Matrix& a) {
      const Matrix c = a.rowwise() - a.colwise().mean();
      return c.squaredNorm();
    };
    CHECK(std::abs(total_var(z) - total_var(x)) < 1e-6 * total_var(x));
    const Matrix gram = m.components * m.components.transpose();
    CHECK((gram - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("fixed matrices against the Jacobi oracle") {
    std::vector<Matrix> inputs;
    Matrix a(6, 3);
    a << 2.5, 2.4, 0.5, 0.5, 0.7, 1.9, 2.2, 2.9, 0.3, 1.9, 2.2, 1.1, 3.1, 3.0, 0.2, 2.3, 2.7, 1.4;
    inputs.push_back(a);
    Matrix b(5, 4);
    b << 1, 0, 2, -1, 0, 3, 1, 1, 2, 1, 0, 4, -1, 2, 2, 0, 0.5, -0.5, 1, 1;
    inputs.push_back(b);
    for (const auto& x : inputs) {
      const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
      const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
      auto ref = oracle::jacobi_eigen(cov);
      const std::size_t k = 2;
      const auto m = pca_fit(x, k);
      for (std::size_t c = 0; c < k; ++c) {
        Eigen::VectorXd v = ref.vectors.col(static_cast<Eigen::Index>(c));
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        CHECK(std::abs(m.explained_variance(static_cast<Eigen::Index>(c)) - ref.values[c]) < 1e-8);
        for (Eigen::Index j = 0; j < v.size(); ++j)
          CHECK(std::abs(m.components(static_cast<Eigen::Index>(c), j) - v(j)) < 1e-8);
      }
    }
  }
  CHECK_THROWS(pca_fit(Matrix::Zero(3, 2), 3));
}

TEST_CASE("train/validation split") {
  Matrix x(10, 1);
  std::vector<int> y(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i;
    y[static_cast<std::size_t>(i)] = i % 10;
  }
  const auto s = train_validation_split(x, y, 0.8, 42);
  CHECK(s.train.size() == 8);
  CHECK(s.validation.size() == 2);
  const auto again = train_validation_split(x, y, 0.8, 42);
  CHECK(s.train.features == again.train.features);
  const auto other = train_validation_split(x, y, 0.8, 43);
  CHECK(s.train.features != other.train.features);

  Matrix four(4, 1);
  four << 0, 1, 2, 3;
  const auto h = train_validation_split(four, {0, 1, 2, 3}, 0.5, 9);
  std::multiset<double> seen;
  for (Eigen::Index i = 0; i < 2; ++i) {
    seen.insert(h.train.features(i, 0));
    seen.insert(h.validation.features(i, 0));
    CHECK(h.train.labels[static_cast<std::size_t>(i)] == static_cast<int>(h.train.features(i, 0)));
  }
  CHECK(seen == std::multiset<double>{0, 1, 2, 3});
}

TEST_CASE("l-cycle examples") {
  std::vector<int> y;
  const Matrix x = labelled_rows(2, y);
  const auto shards = lcycle_distribute(x, y, 10, 2);
  const auto labels_of = [](const DeviceDataShard& s) {
    return std::set<int>(s.labels.begin(), s.labels.end());
  };
  CHECK(labels_of(shards[3]) == std::set<int>{3, 4});
  CHECK(labels_of(shards[9]) == std::set<int>{9, 0});
  for (const auto& s : lcycle_distribute(x, y, 4, 10)) {
    CHECK(labels_of(s).size() == 10);
    CHECK(s.labels.size() == y.size());
  }
  for (std::size_t i = 0; i < 10; ++i) {
    std::vector<int> common;
    const auto a = labels_of(shards[i]), b = labels_of(shards[(i + 1) % 10]);
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    CHECK(common.size() == 1);
  }
}

TEST_CASE("l-cycle membership, exhaustive") {
  std::vector<int> y;
  const Matrix x = labelled_rows(3, y);
  for (int c : {2, 3, 5, 8, 10}) {
    for (int n = 1; n <= 50; ++n) {
      const auto shards = lcycle_distribute(x, y, n, c);
      REQUIRE(shards.size() == static_cast<std::size_t>(n));
      for (int d = 0; d < n; ++d) {
        std::set<int> allowed;
        for (int j = 0; j < c; ++j) allowed.insert((d + j) % 10);
        std::vector<double> expected_rows;
        for (std::size_t r = 0; r < y.size(); ++r)
          if (allowed.count(y[r])) expected_rows.push_back(x(static_cast<Eigen::Index>(r), 0));
        const auto& s = shards[static_cast<std::size_t>(d)];
        std::vector<double> got;
        for (Eigen::Index r = 0; r < s.features.rows(); ++r) {
          got.push_back(s.features(r, 0));
          REQUIRE(allowed.count(s.labels[static_cast<std::size_t>(r)]) == 1);
        }
        std::sort(got.begin(), got.end());
        REQUIRE(got == expected_rows);
      }
    }
  }
  CHECK(label_in_cyclic_range(9, 9, 1));
  CHECK(label_in_cyclic_range(0, 9, 1));
  CHECK_FALSE(label_in_cyclic_range(1, 9, 1));
  CHECK(label_in_cyclic_range(5, 3, 3));
}

TEST_CASE("min-max scaling") {
  const auto s = MinMaxScaler::fit(column({2, 4, 6}));
  const Matrix t = s.transform(column({2, 4, 6}));
  CHECK(t(0, 0) == 0.0);
  CHECK(t(1, 0) == doctest::Approx(0.5));
  CHECK(t(2, 0) == 1.0);
  CHECK(MinMaxScaler::fit(column({3, 3})).transform(column({3, 3})).isZero());
  const Matrix clipped = s.transform(column({0, 8}), true);
  CHECK(clipped(0, 0) == 0.0);
  CHECK(clipped(1, 0) == 1.0);
  const Matrix unclipped = s.transform(column({8}));
  CHECK(unclipped(0, 0) == doctest::Approx(1.5));
}

TEST_CASE("device-local preparation") {
  DeviceDataShard shard;
  shard.device_id = 4;
  shard.features.resize(10, 2);
  for (int i = 0; i < 10; ++i) {
    shard.features(i, 0) = 10 + i;
    shard.features(i, 1) = -i;
    shard.labels.push_back(i % 2);
  }
  const auto d = device_local_prepare(shard, 3);
  REQUIRE(d.has_value());
  CHECK(d->train.size() == 8);
  CHECK(d->test.size() == 2);
  CHECK(d->train.features.minCoeff() >= 0.0);
  CHECK(d->train.features.maxCoeff() <= 1.0);

  DeviceDataShard two = shard;
  two.features.conservativeResize(2, 2);
  two.labels.resize(2);
  const auto t = device_local_prepare(two, 3);
  REQUIRE(t.has_value());
  CHECK(t->train.size() == 1);
  CHECK(t->test.size() == 1);

  CapturedWarnings w;
  DeviceDataShard one = shard;
  one.features.conservativeResize(1, 2);
  one.labels.resize(1);
  CHECK_FALSE(device_local_prepare(one, 3).has_value());
  CHECK(w.messages.size() == 1);
}
