// Copyright 2026 The PdpAccount Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "pdp/dataset.hpp"
#include "pdp/errors.hpp"

using namespace pdp;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
  const std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load_csv parses rows in file order") {
  const auto path = temp_file("ds_basic.csv", "x1,x2,y\n1,0,0.5\n0,1,-0.2\n");
  const Dataset ds = load_csv(path);
  CHECK(ds.n() == 2);
  CHECK(ds.d() == 2);
  CHECK(ds.X()(0, 0) == 1.0);
  CHECK(ds.y()[1] == -0.2);
}

TEST_CASE("load_csv accepts a header-only file") {
  const auto path = temp_file("ds_empty.csv", "x1,x2,x3,y\n");
  const Dataset ds = load_csv(path);
  CHECK(ds.n() == 0);
  CHECK(ds.d() == 3);
}

TEST_CASE("load_csv rejects NaN fields with a line number") {
  const auto path = temp_file("ds_nan.csv", "x1,y\n0.5,NaN\n");
  CHECK_THROWS_AS(load_csv(path), ParseError);
}

TEST_CASE("load_csv rejects inconsistent width") {
  const auto path = temp_file("ds_width.csv", "x1,x2,y\n1,0,0.5\n1,2\n");
  CHECK_THROWS_AS(load_csv(path), Error);
}

TEST_CASE("save/load round trip is bit exact") {
  SyntheticConfig cfg{7, 3, Eigen::VectorXd::Constant(3, 0.4), 0.3, 11};
  const Dataset ds = generate_linear_gaussian(cfg).first;
  const auto path =
      (std::filesystem::temp_directory_path() / "ds_roundtrip.csv").string();
  save_csv(ds, path);
  const Dataset back = load_csv(path);
  CHECK(ds.X() == back.X());
  CHECK(ds.y() == back.y());
}

TEST_CASE("normalize_clip rescales rows and clamps responses") {
  Eigen::MatrixXd X(2, 2);
  X << 3, 4, 0, 0;
  Eigen::VectorXd y(2);
  y << 2, 0.5;
  const Dataset out = normalize_clip(Dataset(X, y));
  CHECK(out.X()(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(out.X()(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(out.y()[0] == 1.0);
  CHECK(out.X().row(1).norm() == 0.0);  // zero row preserved
  CHECK(out.y()[1] == 0.5);

  const Dataset twice = normalize_clip(out);
  CHECK(twice.X() == out.X());
  CHECK(twice.y() == out.y());
}

TEST_CASE("adjacent add and remove are inverse") {
  Dataset empty(2);
  DataPoint z{Eigen::Vector2d(0.3, -0.4), 0.7};
  const Dataset one = adjacent(empty, z, Direction::kAdd);
  CHECK(one.n() == 1);

  SyntheticConfig cfg{5, 2, Eigen::VectorXd::Zero(2), 0.1, 3};
  const Dataset ds = generate_linear_gaussian(cfg).first;
  const Dataset back = adjacent(adjacent(ds, z, Direction::kAdd), z, Direction::kRemove);
  CHECK(back.X() == ds.X());
  CHECK(back.y() == ds.y());

  CHECK_THROWS_AS(adjacent(ds, z, Direction::kRemove), NotFoundError);
}

TEST_CASE("generator is deterministic and honors sigma=0") {
  SyntheticConfig cfg{100, 5, Eigen::VectorXd::Zero(5), 0.0, 7};
  const Dataset a = generate_linear_gaussian(cfg).first;
  const Dataset b = generate_linear_gaussian(cfg).first;
  CHECK(a.X() == b.X());
  CHECK(a.y() == b.y());
  CHECK(a.y().cwiseAbs().maxCoeff() == 0.0);  // theta0 = 0, no noise
  for (Eigen::Index i = 0; i < a.n(); ++i) {
    CHECK(a.X().row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("generator recovers the theta0 direction in expectation") {
  const Eigen::Index n = 2000, d = 10;
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(d);
  theta0[0] = 0.6;
  theta0[3] = -0.3;
  SyntheticConfig cfg{n, d, theta0, 0.1, 99};
  const Dataset ds = generate_linear_gaussian(cfg).first;

  // With unit-norm isotropic rows, E[y x] = theta0 / d.
  for (Eigen::Index j = 0; j < d; ++j) {
    double mean = 0.0, sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = ds.y()[i] * ds.X()(i, j);
      mean += v;
      sq += v * v;
    }
    mean /= static_cast<double>(n);
    const double var = sq / static_cast<double>(n) - mean * mean;
    const double se = std::sqrt(var / static_cast<double>(n));
    CHECK(std::abs(mean - theta0[j] / static_cast<double>(d)) <= 3.0 * se + 1e-3);
  }
}
