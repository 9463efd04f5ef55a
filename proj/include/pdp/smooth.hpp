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
#ifndef PDP_SMOOTH_HPP
#define PDP_SMOOTH_HPP

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "pdp/dataset.hpp"

namespace pdp {

// Twice-differentiable per-example loss plus regularizer for ERM,
// theta_hat = argmin sum_i loss(theta, z_i) + reg(theta).
struct SmoothProblem {
  std::function<double(const Eigen::VectorXd&, const DataPoint&)> loss;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const DataPoint&)> loss_grad;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const DataPoint&)> loss_hess;
  std::function<double(const Eigen::VectorXd&)> reg;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> reg_grad;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> reg_hess;
  double tol = 1e-12;

  // Checks loss_grad and reg_grad against central differences of the value
  // evaluators at (theta, z), to 1e-5 relative. Throws ParamError on mismatch.
  void validate(const Eigen::VectorXd& theta, const DataPoint& z) const;
};

// sum (y - x^T theta)^2 + lambda ||theta||^2; its ERM equals fit_ridge.
SmoothProblem make_squared_loss(double lambda);

// sum log(1 + exp(-y x^T theta)) + lambda ||theta||^2.
SmoothProblem make_logistic(double lambda);

// Damped Newton with backtracking line search. Validates the problem's
// gradients at the starting point, then iterates to gradient norm <= tol.
Eigen::VectorXd solve_erm(const SmoothProblem& problem, const Dataset& ds,
                          int max_iter = 200);

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_01(int nodes, std::vector<double>& t, std::vector<double>& w);

// ||theta_hat(Z) - theta_hat([Z, z])||_A from two independent ERM solves.
double sensitivity_smooth_exact(const SmoothProblem& problem, const Dataset& Z,
                                const DataPoint& z, const Eigen::MatrixXd& A);

// Same quantity via the path-integral identity: the estimator difference is
// Hbar^{-1} grad_loss(theta_hat(Z), z), with Hbar the Hessian of the full
// objective (all of [Z, z] plus reg) averaged along the segment between the
// two solutions by fixed-node Gauss-Legendre quadrature.
double sensitivity_smooth_quasinewton(const SmoothProblem& problem, const Dataset& Z,
                                      const DataPoint& z, int quadrature_nodes,
                                      const Eigen::MatrixXd& A);

}  // namespace pdp

#endif  // PDP_SMOOTH_HPP
