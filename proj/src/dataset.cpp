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
#include "pdp/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pdp/rng.hpp"

namespace pdp {
namespace {

std::vector<std::string> split_comma(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_finite(const std::string& s, long line_no) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0')) {
    throw ParseError("malformed numeric field '" + s + "'", line_no);
  }
  if (!std::isfinite(v)) {
    throw ParseError("non-finite value '" + s + "'", line_no);
  }
  return v;
}

bool bits_equal(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd X, Eigen::VectorXd y) : X_(std::move(X)), y_(std::move(y)) {
  if (X_.rows() != y_.size()) {
    throw DimensionError("feature matrix and response vector disagree on n");
  }
  if (!X_.allFinite() || !y_.allFinite()) {
    throw ParamError("dataset entries must be finite");
  }
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header row", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_comma(line);
  if (header.size() < 2 || header.back() != "y") {
    throw ParseError("expected header x1,...,xd,y", 1);
  }
  const Eigen::Index d = static_cast<Eigen::Index>(header.size()) - 1;

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> ys;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_comma(line);
    if (static_cast<Eigen::Index>(fields.size()) != d + 1) {
      throw DimensionError("row " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(d + 1));
    }
    Eigen::VectorXd x(d);
    for (Eigen::Index j = 0; j < d; ++j) x[j] = parse_finite(fields[j], line_no);
    xs.push_back(std::move(x));
    ys.push_back(parse_finite(fields.back(), line_no));
  }

  Eigen::MatrixXd X(static_cast<Eigen::Index>(xs.size()), d);
  Eigen::VectorXd y(static_cast<Eigen::Index>(ys.size()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    X.row(i) = xs[static_cast<std::size_t>(i)].transpose();
    y[i] = ys[static_cast<std::size_t>(i)];
  }
  return Dataset(std::move(X), std::move(y));
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (Eigen::Index j = 0; j < ds.d(); ++j) out << "x" << (j + 1) << ",";
  out << "y\n";
  char buf[64];
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index j = 0; j < ds.d(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.X()(i, j));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", ds.y()[i]);
    out << buf << "\n";
  }
  if (!out) throw IoError("write failed for " + path);
}

Dataset normalize_clip(const Dataset& ds) {
  Eigen::MatrixXd X = ds.X();
  Eigen::VectorXd y = ds.y();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double norm = X.row(i).norm();
    if (norm > 0.0) X.row(i) /= norm;
    y[i] = std::clamp(y[i], -1.0, 1.0);
  }
  return Dataset(std::move(X), std::move(y));
}

std::pair<Dataset, Eigen::VectorXd> generate_linear_gaussian(const SyntheticConfig& cfg) {
  if (cfg.theta0.size() != cfg.d) {
    throw ParamError("theta0 must have length d");
  }
  if (cfg.sigma < 0.0 || !std::isfinite(cfg.sigma)) {
    throw ParamError("sigma must be nonnegative");
  }
  Rng rng(cfg.seed);
  Eigen::MatrixXd X(cfg.n, cfg.d);
  Eigen::VectorXd y(cfg.n);
  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    Eigen::VectorXd x = rng.gaussian_vector(cfg.d);
    double norm = x.norm();
    if (norm > 0.0) x /= norm;
    X.row(i) = x.transpose();
    y[i] = std::clamp(x.dot(cfg.theta0) + cfg.sigma * rng.gaussian(), -1.0, 1.0);
  }
  return {Dataset(std::move(X), std::move(y)), cfg.theta0};
}

Dataset adjacent(const Dataset& ds, const DataPoint& z, Direction direction) {
  if (z.x.size() != ds.d() && ds.n() > 0) {
    throw DimensionError("point dimension does not match dataset");
  }
  if (direction == Direction::kAdd) {
    Eigen::MatrixXd X(ds.n() + 1, z.x.size());
    Eigen::VectorXd y(ds.n() + 1);
    X.topRows(ds.n()) = ds.X();
    y.head(ds.n()) = ds.y();
    X.row(ds.n()) = z.x.transpose();
    y[ds.n()] = z.y;
    return Dataset(std::move(X), std::move(y));
  }

  Eigen::Index hit = -1;
  for (Eigen::Index i = 0; i < ds.n() && hit < 0; ++i) {
    if (!bits_equal(ds.y()[i], z.y)) continue;
    bool same = true;
    for (Eigen::Index j = 0; j < ds.d() && same; ++j) {
      same = bits_equal(ds.X()(i, j), z.x[j]);
    }
    if (same) hit = i;
  }
  if (hit < 0) throw NotFoundError("point to remove is not present in the dataset");

  Eigen::MatrixXd X(ds.n() - 1, ds.d());
  Eigen::VectorXd y(ds.n() - 1);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    if (i == hit) continue;
    X.row(k) = ds.X().row(i);
    y[k] = ds.y()[i];
    ++k;
  }
  return Dataset(std::move(X), std::move(y));
}

}  // namespace pdp
