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
#include "pdp/smooth.hpp"

#include <cmath>
#include <vector>

#include "pdp/errors.hpp"

namespace pdp {
namespace {

double objective(const SmoothProblem& p, const Dataset& ds,
                 const Eigen::VectorXd& theta) {
  double f = p.reg(theta);
  for (Eigen::Index i = 0; i < ds.n(); ++i) f += p.loss(theta, ds.point(i));
  return f;
}

Eigen::VectorXd gradient(const SmoothProblem& p, const Dataset& ds,
                         const Eigen::VectorXd& theta) {
  Eigen::VectorXd g = p.reg_grad(theta);
  for (Eigen::Index i = 0; i < ds.n(); ++i) g += p.loss_grad(theta, ds.point(i));
  return g;
}

Eigen::MatrixXd hessian(const SmoothProblem& p, const Dataset& ds,
                        const Eigen::VectorXd& theta) {
  Eigen::MatrixXd H = p.reg_hess(theta);
  for (Eigen::Index i = 0; i < ds.n(); ++i) H += p.loss_hess(theta, ds.point(i));
  return H;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

void SmoothProblem::validate(const Eigen::VectorXd& theta, const DataPoint& z) const {
  const double h = 1e-6;
  auto check = [&](double analytic, double numeric, const char* what) {
    const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
    if (std::abs(analytic - numeric) > 1e-5 * scale) {
      throw ParamError(std::string(what) + " does not match finite differences");
    }
  };
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    Eigen::VectorXd up = theta, dn = theta;
    up[j] += h;
    dn[j] -= h;
    check(loss_grad(theta, z)[j], (loss(up, z) - loss(dn, z)) / (2.0 * h), "loss gradient");
    check(reg_grad(theta)[j], (reg(up) - reg(dn)) / (2.0 * h), "regularizer gradient");
  }
}

SmoothProblem make_squared_loss(double lambda) {
  if (lambda < 0.0) throw ParamError("lambda must be nonnegative");
  SmoothProblem p;
  p.loss = [](const Eigen::VectorXd& th, const DataPoint& z) {
    const double r = z.y - z.x.dot(th);
    return r * r;
  };
  p.loss_grad = [](const Eigen::VectorXd& th, const DataPoint& z) {
    return Eigen::VectorXd(-2.0 * (z.y - z.x.dot(th)) * z.x);
  };
  p.loss_hess = [](const Eigen::VectorXd&, const DataPoint& z) {
    return Eigen::MatrixXd(2.0 * z.x * z.x.transpose());
  };
  p.reg = [lambda](const Eigen::VectorXd& th) { return lambda * th.squaredNorm(); };
  p.reg_grad = [lambda](const Eigen::VectorXd& th) {
    return Eigen::VectorXd(2.0 * lambda * th);
  };
  p.reg_hess = [lambda](const Eigen::VectorXd& th) {
    return Eigen::MatrixXd(2.0 * lambda *
                           Eigen::MatrixXd::Identity(th.size(), th.size()));
  };
  return p;
}

SmoothProblem make_logistic(double lambda) {
  if (lambda < 0.0) throw ParamError("lambda must be nonnegative");
  SmoothProblem p;
  p.loss = [](const Eigen::VectorXd& th, const DataPoint& z) {
    const double m = z.y * z.x.dot(th);
    // log(1 + e^{-m}) without overflow.
    return m >= 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
  };
  p.loss_grad = [](const Eigen::VectorXd& th, const DataPoint& z) {
    const double m = z.y * z.x.dot(th);
    return Eigen::VectorXd(-z.y * sigmoid(-m) * z.x);
  };
  p.loss_hess = [](const Eigen::VectorXd& th, const DataPoint& z) {
    const double m = z.y * z.x.dot(th);
    const double s = sigmoid(-m);
    return Eigen::MatrixXd(z.y * z.y * s * (1.0 - s) * z.x * z.x.transpose());
  };
  p.reg = [lambda](const Eigen::VectorXd& th) { return lambda * th.squaredNorm(); };
  p.reg_grad = [lambda](const Eigen::VectorXd& th) {
    return Eigen::VectorXd(2.0 * lambda * th);
  };
  p.reg_hess = [lambda](const Eigen::VectorXd& th) {
    return Eigen::MatrixXd(2.0 * lambda *
                           Eigen::MatrixXd::Identity(th.size(), th.size()));
  };
  return p;
}

Eigen::VectorXd solve_erm(const SmoothProblem& p, const Dataset& ds, int max_iter) {
  if (ds.d() == 0) throw DimensionError("empty feature space");
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(ds.d());
  if (ds.n() > 0) p.validate(theta, ds.point(0));

  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd g = gradient(p, ds, theta);
    if (g.norm() <= p.tol * std::max(1.0, theta.norm())) return theta;
    Eigen::MatrixXd H = hessian(p, ds, theta);
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) {
      // Levenberg damping when the Hessian degenerates (e.g. separable
      // logistic data with lambda = 0).
      const double damp = std::max(1e-10, 1e-10 * H.trace());
      H += damp * Eigen::MatrixXd::Identity(ds.d(), ds.d());
      llt.compute(H);
      if (llt.info() != Eigen::Success) {
        throw SingularError("ERM Hessian is not positive definite");
      }
    }
    const Eigen::VectorXd step = llt.solve(g);
    const double f0 = objective(p, ds, theta);
    const double slope = g.dot(step);
    double t = 1.0;
    while (t > 1e-12 && objective(p, ds, theta - t * step) > f0 - 1e-4 * t * slope) {
      t *= 0.5;
    }
    if (t <= 1e-12) throw ConvergenceError("line search failed in ERM solver");
    theta -= t * step;
  }
  const Eigen::VectorXd g = gradient(p, ds, theta);
  if (g.norm() <= 1e3 * p.tol * std::max(1.0, theta.norm())) return theta;
  throw ConvergenceError("ERM solver did not converge");
}

void gauss_legendre_01(int nodes, std::vector<double>& t, std::vector<double>& w) {
  if (nodes < 1) throw ParamError("need at least one quadrature node");
  t.assign(nodes, 0.0);
  w.assign(nodes, 0.0);
  const int n = nodes;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton on the Legendre polynomial P_n from the Chebyshev-like guess.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double weight = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1, 1] to [0, 1].
    t[i] = (1.0 - x) / 2.0;
    w[i] = weight / 2.0;
    t[n - 1 - i] = (1.0 + x) / 2.0;
    w[n - 1 - i] = weight / 2.0;
  }
}

double sensitivity_smooth_exact(const SmoothProblem& p, const Dataset& Z,
                                const DataPoint& z, const Eigen::MatrixXd& A) {
  const Eigen::VectorXd without = solve_erm(p, Z);
  const Eigen::VectorXd with_z = solve_erm(p, adjacent(Z, z, Direction::kAdd));
  const Eigen::VectorXd diff = without - with_z;
  return std::sqrt(std::max(0.0, static_cast<double>(diff.dot(A * diff))));
}

double sensitivity_smooth_quasinewton(const SmoothProblem& p, const Dataset& Z,
                                      const DataPoint& z, int quadrature_nodes,
                                      const Eigen::MatrixXd& A) {
  const Dataset full = adjacent(Z, z, Direction::kAdd);
  const Eigen::VectorXd without = solve_erm(p, Z);
  const Eigen::VectorXd with_z = solve_erm(p, full);

  std::vector<double> t, w;
  gauss_legendre_01(quadrature_nodes, t, w);
  Eigen::MatrixXd Hbar = Eigen::MatrixXd::Zero(Z.d(), Z.d());
  for (int q = 0; q < quadrature_nodes; ++q) {
    const Eigen::VectorXd eta = t[q] * without + (1.0 - t[q]) * with_z;
    Hbar += w[q] * hessian(p, full, eta);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(Hbar);
  if (llt.info() != Eigen::Success) {
    throw SingularError("integrated Hessian is not positive definite");
  }
  const Eigen::VectorXd diff = llt.solve(p.loss_grad(without, z));
  return std::sqrt(std::max(0.0, static_cast<double>(diff.dot(A * diff))));
}

}  // namespace pdp
