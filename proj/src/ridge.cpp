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
#include "pdp/ridge.hpp"

#include <cmath>

#include "pdp/errors.hpp"

namespace pdp {
namespace {

// Smallest-pivot threshold relative to the mean diagonal mass of H. Bounds
// blow up as H degenerates, so ill-conditioning is an error, not a warning.
constexpr double kPivotRelTol = 1e-12;

double smallest_eigenvalue(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

RidgeSolution::RidgeSolution(Eigen::MatrixXd H, Eigen::VectorXd g, double lambda)
    : H_(std::move(H)), g_(std::move(g)), lambda_(lambda) {
  if (H_.rows() != H_.cols() || H_.rows() != g_.size()) {
    throw DimensionError("H must be square and match g");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(H_);
  const double pivot_tol = kPivotRelTol * H_.trace() / static_cast<double>(H_.rows());
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    L_ = llt.matrixL();
    for (Eigen::Index i = 0; i < L_.rows(); ++i) {
      if (L_(i, i) * L_(i, i) <= pivot_tol) ok = false;
    }
  }
  if (!ok) {
    throw SingularError("regularized Gram matrix is not positive definite",
                        smallest_eigenvalue(H_));
  }
  theta_ = solve_H(g_);
}

Eigen::MatrixXd RidgeSolution::gram() const {
  return H_ - lambda_ * Eigen::MatrixXd::Identity(d(), d());
}

Eigen::VectorXd RidgeSolution::solve_H(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(rhs);
  return L_.transpose().triangularView<Eigen::Upper>().solve(v);
}

Eigen::MatrixXd RidgeSolution::solve_H_matrix() const {
  Eigen::MatrixXd inv = L_.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(d(), d()));
  return L_.transpose().triangularView<Eigen::Upper>().solve(inv);
}

double RidgeSolution::log_det_H() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < L_.rows(); ++i) s += std::log(L_(i, i));
  return 2.0 * s;
}

RidgeSolution fit_ridge(const Dataset& ds, double lambda) {
  if (lambda < 0.0) throw ParamError("lambda must be nonnegative");
  Eigen::MatrixXd H = ds.X().transpose() * ds.X();
  H += lambda * Eigen::MatrixXd::Identity(ds.d(), ds.d());
  Eigen::VectorXd g = ds.X().transpose() * ds.y();
  return RidgeSolution(std::move(H), std::move(g), lambda);
}

LeveragePair leverage(const RidgeSolution& sol, const Eigen::VectorXd& x) {
  if (x.size() != sol.d()) throw DimensionError("leverage: dimension mismatch");
  double mu = x.dot(sol.solve_H(x));
  if (mu < 0.0) mu = 0.0;
  return {mu, mu / (1.0 + mu)};
}

RidgeSolution rank_one_update(const RidgeSolution& sol, const DataPoint& z,
                              Direction direction) {
  if (z.x.size() != sol.d()) throw DimensionError("rank_one_update: dimension mismatch");
  const double sign = direction == Direction::kAdd ? 1.0 : -1.0;
  Eigen::MatrixXd H = sol.H() + sign * (z.x * z.x.transpose());
  Eigen::VectorXd g = sol.g() + sign * z.y * z.x;
  return RidgeSolution(std::move(H), std::move(g), sol.lambda());
}

double min_eigenvalue(const Dataset& ds) {
  if (ds.n() == 0 || ds.d() == 0) return 0.0;
  Eigen::MatrixXd gram = ds.X().transpose() * ds.X();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().minCoeff());
}

double residual(const RidgeSolution& sol, const DataPoint& z) {
  if (z.x.size() != sol.d()) throw DimensionError("residual: dimension mismatch");
  return z.y - z.x.dot(sol.theta());
}

}  // namespace pdp
