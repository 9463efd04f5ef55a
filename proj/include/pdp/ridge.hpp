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
#ifndef PDP_RIDGE_HPP
#define PDP_RIDGE_HPP

#include <Eigen/Dense>

#include "pdp/dataset.hpp"

namespace pdp {

// Out-of-sample leverage mu = x^T H^{-1} x and its in-sample counterpart
// mu' = mu / (1 + mu) = x^T (H + x x^T)^{-1} x.
struct LeveragePair {
  double mu = 0.0;
  double mu_prime = 0.0;
};

// Exact ridge solution together with the regularized Gram matrix
// H = X^T X + lambda I and a cached Cholesky factorization. Immutable;
// rank-one updates return a new value.
class RidgeSolution {
 public:
  RidgeSolution(Eigen::MatrixXd H, Eigen::VectorXd g, double lambda);

  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::MatrixXd& H() const { return H_; }
  const Eigen::VectorXd& g() const { return g_; }
  double lambda() const { return lambda_; }
  Eigen::Index d() const { return H_.rows(); }

  // Gram matrix without the ridge term.
  Eigen::MatrixXd gram() const;

  Eigen::VectorXd solve_H(const Eigen::VectorXd& rhs) const;
  // Dense H^{-1}.
  Eigen::MatrixXd solve_H_matrix() const;
  // Lower-triangular L with H = L L^T.
  const Eigen::MatrixXd& chol_L() const { return L_; }
  double log_det_H() const;

 private:
  Eigen::MatrixXd H_;
  Eigen::VectorXd g_;
  double lambda_;
  Eigen::VectorXd theta_;
  Eigen::MatrixXd L_;
};

// theta = (X^T X + lambda I)^{-1} X^T y. Throws SingularError (carrying the
// smallest eigenvalue) when H fails the positive-definiteness guard.
RidgeSolution fit_ridge(const Dataset& ds, double lambda);

LeveragePair leverage(const RidgeSolution& sol, const Eigen::VectorXd& x);

// H' = H +/- x x^T, g' = g +/- y x; equals a fresh fit on the adjacent
// data set.
RidgeSolution rank_one_update(const RidgeSolution& sol, const DataPoint& z,
                              Direction direction);

// Smallest eigenvalue of X^T X (clamped at zero), by full symmetric
// eigendecomposition.
double min_eigenvalue(const Dataset& ds);

// y - x^T theta_hat.
double residual(const RidgeSolution& sol, const DataPoint& z);

}  // namespace pdp

#endif  // PDP_RIDGE_HPP
