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
#ifndef PDP_DATASET_HPP
#define PDP_DATASET_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pdp/errors.hpp"

namespace pdp {

// One labeled example z = (x, y).
struct DataPoint {
  Eigen::VectorXd x;
  double y = 0.0;
};

enum class Direction { kAdd, kRemove };

// Immutable ordered collection of rows sharing dimension d. Row order is
// meaningful: per-point privacy reports are keyed by row index.
class Dataset {
 public:
  Dataset() = default;
  // Empty data set with a fixed feature dimension.
  explicit Dataset(Eigen::Index d) : X_(0, d), y_(0) {}
  Dataset(Eigen::MatrixXd X, Eigen::VectorXd y);

  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index d() const { return X_.cols(); }

  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::VectorXd& y() const { return y_; }

  DataPoint point(Eigen::Index i) const { return {X_.row(i).transpose(), y_[i]}; }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
};

// Parameters of the linear Gaussian generator y = x^T theta0 + sigma * xi.
struct SyntheticConfig {
  Eigen::Index n = 0;
  Eigen::Index d = 0;
  Eigen::VectorXd theta0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

// Reads "x1,...,xd,y" CSV. Throws ParseError (with line number) on malformed
// rows and DimensionError on inconsistent width.
Dataset load_csv(const std::string& path);

// Writes the same format with 17 significant digits and LF line endings, so
// that a load/save round trip is bit exact.
void save_csv(const Dataset& ds, const std::string& path);

// Rows get unit Euclidean norm (zero rows are left as zero), responses are
// clamped to [-1, 1]. Idempotent.
Dataset normalize_clip(const Dataset& ds);

// Draws rows from a spherical Gaussian, normalizes them, then forms
// y = x^T theta0 + sigma * xi clipped to [-1, 1]. Pure function of cfg.
std::pair<Dataset, Eigen::VectorXd> generate_linear_gaussian(const SyntheticConfig& cfg);

// Returns [Z, z] or Z \ {z}. For removal the point must match an existing row
// exactly (bit for bit); the first such row is dropped.
Dataset adjacent(const Dataset& ds, const DataPoint& z, Direction direction);

}  // namespace pdp

#endif  // PDP_DATASET_HPP
