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
#ifndef PDP_MECHANISMS_HPP
#define PDP_MECHANISMS_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "pdp/dataset.hpp"
#include "pdp/ridge.hpp"

namespace pdp {

enum class MechanismKind { kGaussian, kOps, kObjPert, kAdaOps };

std::string mechanism_name(MechanismKind kind);

// Noise-shape matrix A for the output perturbation mechanism. Isotropic uses
// the smallest eigenvalue of the Gram matrix, "democratic" its square,
// "Fisher" the Gram matrix itself; Explicit carries an arbitrary SPD matrix.
struct NoiseDesign {
  enum class Kind { kIsotropic, kDemocratic, kFisher, kExplicit };

  Kind kind = Kind::kFisher;
  Eigen::MatrixXd explicit_A;  // used only when kind == kExplicit

  static NoiseDesign isotropic() { return {Kind::kIsotropic, {}}; }
  static NoiseDesign democratic() { return {Kind::kDemocratic, {}}; }
  static NoiseDesign fisher() { return {Kind::kFisher, {}}; }
  static NoiseDesign explicit_matrix(Eigen::MatrixXd A) {
    return {Kind::kExplicit, std::move(A)};
  }

  // Builds A from the (unregularized) Gram matrix. Throws SingularError when
  // the realized matrix is not SPD.
  Eigen::MatrixXd realize(const Eigen::MatrixXd& gram) const;
};

// Which mechanism ran with which parameters; echoed into samples and consumed
// by the accounting layer.
struct MechanismSpec {
  MechanismKind kind = MechanismKind::kGaussian;
  NoiseDesign design;
  double gamma = 1.0;
  double lambda = 0.0;
  double sigma = 0.0;       // objective perturbation noise scale
  double eps_budget = 1.0;  // AdaOPS only
  double delta = 1e-6;
  double kappa = 0.0;       // AdaOPS only
  std::uint64_t seed = 0;
};

// Diagnostics recorded by AdaOPS: the privately released eigenvalue and the
// parameters it chose.
struct AdaOpsDiagnostics {
  double lambda_min_tilde = 0.0;
  double lambda_n = 0.0;
  double gamma_n = 0.0;
};

struct MechanismSample {
  Eigen::VectorXd theta_tilde;
  MechanismSpec spec;
  std::optional<AdaOpsDiagnostics> diagnostics;
};

// theta_tilde = theta_hat + L xi with L L^T = A^{-1}/gamma.
MechanismSample output_perturb(const RidgeSolution& sol, const NoiseDesign& design,
                               double gamma, std::uint64_t seed);

// One draw from N(theta_hat, (gamma H)^{-1}) with H = X^T X + lambda I.
MechanismSample ops_sample(const Dataset& ds, double lambda, double gamma,
                           std::uint64_t seed);

// theta_tilde = (X^T X + lambda I)^{-1} (X^T y - b/2), b ~ N(0, sigma^2 I).
MechanismSample objpert_sample(const Dataset& ds, double sigma, double lambda,
                               std::uint64_t seed);

// Largest kappa the AdaOPS input constraint allows for (n, d, eps, delta).
double adaops_kappa_bound(Eigen::Index n, Eigen::Index d, double eps, double delta);

// AdaOPS parameter arithmetic, exposed so reports and tests can evaluate it
// without sampling. lambda_n uses the released eigenvalue estimate.
double adaops_gamma_n(Eigen::Index n, Eigen::Index d, double eps, double delta,
                      double kappa);
double adaops_lambda_n(Eigen::Index n, Eigen::Index d, double eps, double delta,
                       double kappa, double lambda_min_tilde);

// OPS with adaptive regularization: privately releases the smallest Gram
// eigenvalue, picks (lambda_n, gamma_n), then draws one posterior sample. Two
// independent sub-streams are derived from the master seed (mix64(seed) for
// the eigenvalue release, mix64(seed + 1) for the posterior draw).
MechanismSample adaops(const Dataset& ds, double eps, double delta, double kappa,
                       std::uint64_t seed);

}  // namespace pdp

#endif  // PDP_MECHANISMS_HPP
