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
#include "pdp/mechanisms.hpp"

#include <cmath>

#include "pdp/errors.hpp"
#include "pdp/rng.hpp"

namespace pdp {
namespace {

// Draw from N(0, A^{-1}/gamma) given A. Solving L^T w = xi against the
// Cholesky factor A = L L^T gives w with covariance A^{-1}.
Eigen::VectorXd sample_inverse_gaussian(const Eigen::MatrixXd& A, double gamma,
                                        Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw SingularError("noise design matrix A is not positive definite");
  }
  Eigen::VectorXd xi = rng.gaussian_vector(A.rows());
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::VectorXd w = L.transpose().triangularView<Eigen::Upper>().solve(xi);
  return w / std::sqrt(gamma);
}

}  // namespace

std::string mechanism_name(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kGaussian:
      return "gaussian";
    case MechanismKind::kOps:
      return "ops";
    case MechanismKind::kObjPert:
      return "objpert";
    case MechanismKind::kAdaOps:
      return "adaops";
  }
  return "unknown";
}

Eigen::MatrixXd NoiseDesign::realize(const Eigen::MatrixXd& gram) const {
  switch (kind) {
    case Kind::kIsotropic: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
      double lmin = es.eigenvalues().minCoeff();
      if (lmin <= 0.0) {
        throw SingularError("isotropic design requires lambda_min(X^T X) > 0", lmin);
      }
      return lmin * Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
    }
    case Kind::kDemocratic:
      return gram * gram;
    case Kind::kFisher:
      return gram;
    case Kind::kExplicit:
      if (explicit_A.rows() != gram.rows() || explicit_A.cols() != gram.cols()) {
        throw DimensionError("explicit design matrix has wrong shape");
      }
      return explicit_A;
  }
  throw ParamError("unknown noise design");
}

MechanismSample output_perturb(const RidgeSolution& sol, const NoiseDesign& design,
                               double gamma, std::uint64_t seed) {
  if (gamma <= 0.0) throw ParamError("gamma must be positive");
  Eigen::MatrixXd A = design.realize(sol.gram());
  Rng rng(seed);
  MechanismSample out;
  out.theta_tilde = sol.theta() + sample_inverse_gaussian(A, gamma, rng);
  out.spec = {MechanismKind::kGaussian, design, gamma, sol.lambda(), 0.0, 0.0, 0.0, 0.0, seed};
  return out;
}

MechanismSample ops_sample(const Dataset& ds, double lambda, double gamma,
                           std::uint64_t seed) {
  if (gamma <= 0.0) throw ParamError("gamma must be positive");
  RidgeSolution sol = fit_ridge(ds, lambda);
  Rng rng(seed);
  MechanismSample out;
  out.theta_tilde = sol.theta() + sample_inverse_gaussian(sol.H(), gamma, rng);
  out.spec = {MechanismKind::kOps, NoiseDesign::fisher(), gamma, lambda, 0.0, 0.0, 0.0, 0.0, seed};
  return out;
}

MechanismSample objpert_sample(const Dataset& ds, double sigma, double lambda,
                               std::uint64_t seed) {
  if (sigma < 0.0) throw ParamError("sigma must be nonnegative");
  RidgeSolution sol = fit_ridge(ds, lambda);
  Rng rng(seed);
  Eigen::VectorXd b = sigma * rng.gaussian_vector(ds.d());
  MechanismSample out;
  out.theta_tilde = sol.solve_H(sol.g() - 0.5 * b);
  out.spec = {MechanismKind::kObjPert, NoiseDesign::democratic(), 0.0, lambda, sigma, 0.0, 0.0, 0.0, seed};
  return out;
}

double adaops_kappa_bound(Eigen::Index n, Eigen::Index d, double eps, double delta) {
  return static_cast<double>(n) * eps /
         (4.0 * static_cast<double>(d) * (1.0 + std::log(4.0 / delta)));
}

double adaops_gamma_n(Eigen::Index n, Eigen::Index d, double eps, double delta,
                      double kappa) {
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  const double l4d = std::log(4.0 / delta);
  return std::min(nn * eps * eps / (16.0 * kappa * kappa * dd * dd * l4d),
                  nn * eps / (8.0 * kappa * kappa * dd * dd));
}

double adaops_lambda_n(Eigen::Index n, Eigen::Index d, double eps, double delta,
                       double kappa, double lambda_min_tilde) {
  const double l4d = std::log(4.0 / delta);
  // Clamped from below at zero; a negative ridge term would violate the
  // lambda_min(X^T X + lambda_n I) >= n/(d kappa) requirement.
  return std::max(0.0, static_cast<double>(n) / (static_cast<double>(d) * kappa) -
                           lambda_min_tilde + l4d / (eps / 2.0));
}

MechanismSample adaops(const Dataset& ds, double eps, double delta, double kappa,
                       std::uint64_t seed) {
  if (eps <= 0.0) throw ParamError("eps must be positive");
  if (delta <= 0.0 || delta >= 1.0) throw ParamError("delta must lie in (0, 1)");
  const double bound = adaops_kappa_bound(ds.n(), ds.d(), eps, delta);
  if (kappa <= 0.0 || kappa > bound) {
    throw ParamError("kappa must satisfy 0 < kappa <= n*eps/(4d(1+log(4/delta))) = " +
                     std::to_string(bound));
  }

  const double lmin = min_eigenvalue(ds);
  Rng release_rng(mix64(seed));
  const double noise_scale = std::sqrt(std::log(4.0 / delta)) / (eps / 2.0);
  const double lmin_tilde = lmin + noise_scale * release_rng.gaussian();

  AdaOpsDiagnostics diag;
  diag.lambda_min_tilde = lmin_tilde;
  diag.lambda_n = adaops_lambda_n(ds.n(), ds.d(), eps, delta, kappa, lmin_tilde);
  diag.gamma_n = adaops_gamma_n(ds.n(), ds.d(), eps, delta, kappa);

  MechanismSample out = ops_sample(ds, diag.lambda_n, diag.gamma_n, mix64(seed + 1));
  out.spec.kind = MechanismKind::kAdaOps;
  out.spec.eps_budget = eps;
  out.spec.delta = delta;
  out.spec.kappa = kappa;
  out.spec.seed = seed;
  out.diagnostics = diag;
  return out;
}

}  // namespace pdp
