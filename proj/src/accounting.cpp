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
#include "pdp/accounting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "pdp/errors.hpp"
#include "pdp/rng.hpp"

namespace pdp {
namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Effective (A, gamma) of the Gaussian view of a mechanism. Objective
// perturbation is output perturbation with A = (X^T X + lambda I)^2 and
// gamma = 4/sigma^2.
struct GaussianView {
  Eigen::MatrixXd A;
  double gamma;
};

GaussianView gaussian_view(const MechanismSpec& spec, const Eigen::MatrixXd& gram,
                           double lambda) {
  if (spec.kind == MechanismKind::kGaussian) {
    return {spec.design.realize(gram), spec.gamma};
  }
  if (spec.kind == MechanismKind::kObjPert) {
    if (spec.sigma <= 0.0) throw ParamError("objpert accounting needs sigma > 0");
    Eigen::MatrixXd H = gram + lambda * Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
    return {H * H, 4.0 / (spec.sigma * spec.sigma)};
  }
  throw ParamError("mechanism has no fixed-covariance Gaussian form");
}

}  // namespace

double McVerdict::delta_hat_max() const {
  return std::max(delta_hat_forward, delta_hat_backward);
}

double McVerdict::stderr_max() const {
  return delta_hat_forward >= delta_hat_backward ? stderr_forward : stderr_backward;
}

bool McVerdict::pass(double delta_target) const {
  return delta_hat_max() <= delta_target + 3.0 * stderr_max();
}

double sensitivity_linreg(const RidgeSolution& sol, const DataPoint& z,
                          const Eigen::MatrixXd& A) {
  if (z.x.size() != sol.d() || A.rows() != sol.d() || A.cols() != sol.d()) {
    throw DimensionError("sensitivity_linreg: dimension mismatch");
  }
  const Eigen::VectorXd u = sol.solve_H(z.x);
  const double mu = z.x.dot(u);
  const double r = residual(sol, z);
  // theta_hat' - theta_hat = r/(1+mu) H^{-1} x by Sherman-Morrison.
  const Eigen::VectorXd diff = (r / (1.0 + mu)) * u;
  const double q = diff.dot(A * diff);
  return std::sqrt(std::max(0.0, q));
}

double gaussian_pdp(double delta_A, double gamma, double delta) {
  if (delta_A < 0.0) throw ParamError("sensitivity must be nonnegative");
  if (delta <= 0.0 || delta >= 1.0) throw ParamError("delta must lie in (0, 1)");
  return gamma * delta_A * std::sqrt(std::log(1.25 / delta));
}

double gaussian_delta_exact(double mahalanobis, double eps) {
  if (mahalanobis < 0.0) throw ParamError("mahalanobis distance must be nonnegative");
  if (mahalanobis == 0.0) return 0.0;
  const double m = mahalanobis;
  return normal_cdf(m / 2.0 - eps / m) - std::exp(eps) * normal_cdf(-m / 2.0 - eps / m);
}

double gaussian_dp_worstcase(Eigen::Index n, double lambda, double gamma,
                             double delta) {
  if (lambda <= 0.0) throw ParamError("worst-case DP needs lambda > 0");
  const double theta_norm_bound = std::sqrt(static_cast<double>(n)) / (2.0 * std::sqrt(lambda));
  const double delta_max = (1.0 + theta_norm_bound) / lambda;
  return gaussian_pdp(delta_max, gamma, delta);
}

// Tail calibration shared by the posterior-sampling bounds. The privacy loss
// is a quadratic in one standard normal g; confining |g| to t with
// P(|g| > t) <= 2 e^{-t^2/2} = delta requires t^2 = 2 log(2/delta). The
// smaller constant t^2 = log(2/delta) fails Monte-Carlo certification at
// small delta, so the factor 2 is kept throughout this family of bounds.
double ops_eps_out(double mu, double res_out, double gamma, double delta) {
  const double l = std::log(2.0 / delta);
  return 0.5 * std::abs(-std::log1p(mu) + gamma * mu / (1.0 + mu) * res_out * res_out) +
         mu * l + std::sqrt(2.0 * gamma * mu * l) * std::abs(res_out);
}

double ops_eps_in(double mu_prime, double res_in, double gamma, double delta) {
  const double l = std::log(2.0 / delta);
  return 0.5 * std::abs(-std::log1p(-mu_prime) -
                        gamma * mu_prime / (1.0 - mu_prime) * res_in * res_in) +
         mu_prime * l + std::sqrt(2.0 * gamma * mu_prime * l) * std::abs(res_in);
}

OpsPdpBound ops_pdp_bound(const RidgeSolution& sol_without, const DataPoint& z,
                          double gamma, double delta) {
  if (delta >= 2.0 / M_E) {
    throw ParamError("ops_pdp_bound requires delta < 2/e");
  }
  if (delta <= 0.0) throw ParamError("delta must be positive");
  const LeveragePair lev = leverage(sol_without, z.x);
  const double r = residual(sol_without, z);
  const double r_in = r / (1.0 + lev.mu);
  OpsPdpBound out;
  out.eps_out = ops_eps_out(lev.mu, r, gamma, delta);
  out.eps_in = ops_eps_in(lev.mu_prime, r_in, gamma, delta);
  out.eps = std::min(out.eps_out, out.eps_in);
  return out;
}

double ops_pdp_agnostic(double lambda, double lambda_min, double gamma,
                        double delta, double residual) {
  const double s = lambda + lambda_min;
  if (s <= 0.0) throw ParamError("lambda + lambda_min must be positive");
  const double l = std::log(2.0 / delta);
  const double r = std::abs(residual);
  return std::sqrt(2.0 * gamma * l / s) * r + gamma * r * r / (2.0 * std::max(s, 1.0)) +
         gamma * (1.0 + 2.0 * l) / (2.0 * s);
}

double ops_dp_agnostic(Eigen::Index n, double lambda, double gamma, double delta) {
  if (lambda <= 0.0) throw ParamError("agnostic DP needs lambda > 0");
  const double l = std::log(2.0 / delta);
  const double npl = static_cast<double>(n) + lambda;
  return std::sqrt(4.0 * npl * gamma * l / (lambda * lambda)) +
         2.0 * npl * gamma / (lambda * std::max(1.0, lambda)) +
         gamma * (1.0 + 2.0 * l) / (2.0 * lambda);
}

PdpBudget compose_simple(const std::vector<PdpBudget>& budgets) {
  PdpBudget total;
  for (const auto& b : budgets) {
    total.eps += b.eps;
    total.delta += b.delta;
  }
  return total;
}

PdpBudget compose_advanced(double eps, double delta, std::int64_t k,
                           double delta_slack) {
  if (k < 0) throw ParamError("k must be nonnegative");
  const double kk = static_cast<double>(k);
  PdpBudget out;
  out.eps = std::sqrt(2.0 * kk * std::log(1.0 / delta_slack)) * eps +
            kk * eps * std::expm1(eps);
  out.delta = kk * delta + delta_slack;
  return out;
}

PdpBudget group_privacy(const std::vector<double>& eps_seq,
                        const std::vector<double>& delta_seq) {
  if (eps_seq.size() != delta_seq.size()) {
    throw DimensionError("group_privacy: sequence length mismatch");
  }
  PdpBudget out;
  double prod = 1.0;
  for (std::size_t i = 0; i < eps_seq.size(); ++i) {
    out.eps += eps_seq[i];
    out.delta += delta_seq[i] * prod;
    prod *= std::exp(eps_seq[i]);
  }
  return out;
}

PdpDatasetReport pdp_dataset_report(const Dataset& ds, const MechanismSpec& spec,
                                    double delta, int k) {
  if (k < 1) throw ParamError("moment order must be at least 1");
  if (spec.kind == MechanismKind::kAdaOps) {
    throw ParamError("per-row reports need the realized OPS parameters; "
                     "report AdaOPS runs as OPS with its chosen lambda_n, gamma_n");
  }
  const RidgeSolution sol = fit_ridge(ds, spec.lambda);

  const bool ops = spec.kind == MechanismKind::kOps;
  Eigen::MatrixXd A;
  double gamma = spec.gamma;
  if (!ops) {
    GaussianView view = gaussian_view(spec, sol.gram(), spec.lambda);
    A = std::move(view.A);
    gamma = view.gamma;
  }
  const double sqrt_log_term = ops ? 0.0 : std::sqrt(std::log(1.25 / delta));

  PdpDatasetReport report;
  report.delta = delta;
  report.points.reserve(static_cast<std::size_t>(ds.n()));
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    const DataPoint z = ds.point(i);
    const Eigen::VectorXd u = sol.solve_H(z.x);
    const double mu_prime = z.x.dot(u);
    if (mu_prime >= 1.0 - 1e-12) {
      throw SingularError("leave-one-out Gram matrix is singular for row " +
                          std::to_string(i));
    }
    const double r_in = residual(sol, z);
    PdpPointReport pt;
    pt.index = i;
    pt.mu_prime = mu_prime;
    pt.mu = mu_prime / (1.0 - mu_prime);
    pt.residual = r_in;
    if (ops) {
      pt.eps = ops_eps_in(mu_prime, r_in, gamma, delta);
      pt.bound_used = "ops-in";
    } else {
      // Delta_A(Z_-i, z_i) = |r_loo| sqrt(x^T H^{-1} A H^{-1} x) with the
      // leave-one-out residual r_loo = r_in / (1 - mu').
      const double q = std::max(0.0, u.dot(A * u));
      const double delta_A = std::abs(r_in) / (1.0 - mu_prime) * std::sqrt(q);
      pt.eps = gamma * delta_A * sqrt_log_term;
      pt.bound_used = "gaussian-calibrated";
    }
    report.points.push_back(std::move(pt));
  }

  std::vector<double> eps_values;
  eps_values.reserve(report.points.size());
  for (const auto& pt : report.points) eps_values.push_back(pt.eps);

  report.moments.assign(static_cast<std::size_t>(k), 0.0);
  if (!eps_values.empty()) {
    for (double e : eps_values) {
      double p = 1.0;
      for (int j = 0; j < k; ++j) {
        p *= e;
        report.moments[static_cast<std::size_t>(j)] += p;
      }
    }
    for (auto& m : report.moments) m /= static_cast<double>(eps_values.size());

    std::sort(eps_values.begin(), eps_values.end());
    report.q_min = eps_values.front();
    report.q25 = quantile_sorted(eps_values, 0.25);
    report.q50 = quantile_sorted(eps_values, 0.5);
    report.q75 = quantile_sorted(eps_values, 0.75);
    report.q_max = eps_values.back();
  }
  return report;
}

void write_report_csv(const PdpDatasetReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "index,mu,mu_prime,residual,eps\n";
  for (const auto& pt : report.points) {
    out << pt.index << "," << fmt(pt.mu) << "," << fmt(pt.mu_prime) << ","
        << fmt(pt.residual) << "," << fmt(pt.eps) << "\n";
  }
  out << "#";
  for (std::size_t j = 0; j < report.moments.size(); ++j) {
    out << (j == 0 ? " " : ", ") << "moment" << (j + 1) << "=" << fmt(report.moments[j]);
  }
  out << ", min=" << fmt(report.q_min) << ", q25=" << fmt(report.q25)
      << ", q50=" << fmt(report.q50) << ", q75=" << fmt(report.q75)
      << ", max=" << fmt(report.q_max) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

PdpForAllResult pdp_for_all(const RidgeSolution& sol, const MechanismSpec& spec,
                            double delta, int search_budget, std::uint64_t seed) {
  const Eigen::Index d = sol.d();
  const Eigen::MatrixXd Hinv = sol.solve_H_matrix();
  const bool ops = spec.kind == MechanismKind::kOps;

  Eigen::MatrixXd M;  // H^{-1} A H^{-1} for the Gaussian view
  double gamma = spec.gamma;
  double m_lambda_max = 0.0;
  if (!ops) {
    GaussianView view = gaussian_view(spec, sol.gram(), spec.lambda);
    gamma = view.gamma;
    M = Hinv * view.A * Hinv;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    m_lambda_max = std::max(0.0, es.eigenvalues().maxCoeff());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hes(Hinv, Eigen::EigenvaluesOnly);
  const double mu_max = std::max(0.0, hes.eigenvalues().maxCoeff());

  const double sqrt_log_gauss = std::sqrt(std::log(1.25 / delta));

  // eps at a candidate (x, y) in the domain, using the out-of-sample
  // (add-one-point) expressions.
  auto eval = [&](const Eigen::VectorXd& x, double y) {
    const double mu = std::max(0.0, static_cast<double>(x.dot(Hinv * x)));
    const double r = y - x.dot(sol.theta());
    if (ops) {
      const double eo = ops_eps_out(mu, r, gamma, delta);
      const double ei = ops_eps_in(mu / (1.0 + mu), r / (1.0 + mu), gamma, delta);
      return std::min(eo, ei);
    }
    const double delta_A = std::abs(r) / (1.0 + mu) *
                           std::sqrt(std::max(0.0, static_cast<double>(x.dot(M * x))));
    return gamma * delta_A * sqrt_log_gauss;
  };

  // y in {-1, +1} opposing the prediction maximizes |y - x^T theta| and eps
  // is monotone in that factor.
  auto best_y = [&](const Eigen::VectorXd& x) {
    return x.dot(sol.theta()) > 0.0 ? -1.0 : 1.0;
  };

  PdpForAllResult result;
  Rng rng(mix64(seed));
  for (int c = 0; c < search_budget; ++c) {
    Eigen::VectorXd x = rng.gaussian_vector(d);
    double norm = x.norm();
    if (norm == 0.0) continue;
    x /= norm;
    double y = best_y(x);
    double val = eval(x, y);

    // Coordinate refinement with a shrinking step and a fixed iteration cap.
    double step = 0.5;
    for (int iter = 0; iter < 50; ++iter) {
      bool improved = false;
      for (Eigen::Index j = 0; j < d; ++j) {
        for (double s : {step, -step}) {
          Eigen::VectorXd cand = x;
          cand[j] += s;
          double cn = cand.norm();
          if (cn == 0.0) continue;
          cand /= cn;
          double cy = best_y(cand);
          double cv = eval(cand, cy);
          if (cv > val) {
            x = cand;
            y = cy;
            val = cv;
            improved = true;
          }
        }
      }
      if (!improved) {
        step *= 0.5;
        if (step < 1e-6) break;
      }
    }
    result.sup_estimate = std::max(result.sup_estimate, val);
  }

  const double r_bound = 1.0 + sol.theta().norm();
  if (ops) {
    const double l = std::log(2.0 / delta);
    result.analytic_upper = 0.5 * mu_max * (1.0 + 2.0 * l) +
                            0.5 * gamma * std::min(mu_max, 1.0) * r_bound * r_bound +
                            std::sqrt(2.0 * gamma * mu_max * l) * r_bound;
  } else {
    result.analytic_upper = gamma * r_bound * std::sqrt(m_lambda_max) * sqrt_log_gauss;
  }
  return result;
}

McVerdict verify_pdp_mc(const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1,
                        const Eigen::VectorXd& mean2, const Eigen::MatrixXd& cov2,
                        double eps, std::int64_t n_samples, std::uint64_t seed) {
  const Eigen::Index d = mean1.size();
  if (mean2.size() != d || cov1.rows() != d || cov1.cols() != d ||
      cov2.rows() != d || cov2.cols() != d) {
    throw DimensionError("verify_pdp_mc: dimension mismatch");
  }
  if (n_samples <= 0) throw ParamError("n_samples must be positive");

  Eigen::LLT<Eigen::MatrixXd> llt1(cov1), llt2(cov2);
  if (llt1.info() != Eigen::Success || llt2.info() != Eigen::Success) {
    throw SingularError("covariance matrices must be positive definite");
  }
  const Eigen::MatrixXd L1 = llt1.matrixL();
  const Eigen::MatrixXd L2 = llt2.matrixL();
  auto log_det = [](const Eigen::MatrixXd& L) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
    return 2.0 * s;
  };
  const double ld1 = log_det(L1);
  const double ld2 = log_det(L2);

  constexpr std::int64_t kShard = 1 << 16;

  // One direction: sample from N(mean_p, Lp Lp^T) and estimate
  // E max(0, 1 - e^{eps - L}) with L the exact log density ratio p/q.
  auto run = [&](const Eigen::VectorXd& mean_p, const Eigen::MatrixXd& Lp, double ldp,
                 const Eigen::VectorXd& mean_q, const Eigen::MatrixXd& Lq, double ldq,
                 std::uint64_t dir_tag, double& out_mean, double& out_stderr) {
    // theta = mean_p + Lp xi; Lq^{-1}(theta - mean_q) = c + T xi.
    const Eigen::VectorXd c = Lq.triangularView<Eigen::Lower>().solve(mean_p - mean_q);
    const Eigen::MatrixXd T = Lq.triangularView<Eigen::Lower>().solve(Lp);
    const double ld_half = 0.5 * (ldq - ldp);

    double sum = 0.0, sumsq = 0.0;
    Eigen::VectorXd xi(d), w(d);
    std::int64_t done = 0;
    std::uint64_t shard = 0;
    while (done < n_samples) {
      Rng rng(mix64(seed + 0x1000003 * dir_tag + shard));
      const std::int64_t count = std::min(kShard, n_samples - done);
      for (std::int64_t s = 0; s < count; ++s) {
        for (Eigen::Index i = 0; i < d; ++i) xi[i] = rng.gaussian();
        w.noalias() = T * xi;
        w += c;
        const double L = ld_half + 0.5 * (w.squaredNorm() - xi.squaredNorm());
        const double contrib = L > eps ? 1.0 - std::exp(eps - L) : 0.0;
        sum += contrib;
        sumsq += contrib * contrib;
      }
      done += count;
      ++shard;
    }
    const double n = static_cast<double>(n_samples);
    out_mean = sum / n;
    const double var = std::max(0.0, sumsq / n - out_mean * out_mean);
    out_stderr = std::sqrt(var / n);
  };

  McVerdict v;
  v.eps_tested = eps;
  v.n_samples = n_samples;
  run(mean1, L1, ld1, mean2, L2, ld2, 1, v.delta_hat_forward, v.stderr_forward);
  run(mean2, L2, ld2, mean1, L1, ld1, 2, v.delta_hat_backward, v.stderr_backward);
  return v;
}

OpsPair ops_adjacent_pair(const RidgeSolution& sol_without, const DataPoint& z,
                          double gamma) {
  if (gamma <= 0.0) throw ParamError("gamma must be positive");
  const RidgeSolution sol_with = rank_one_update(sol_without, z, Direction::kAdd);
  OpsPair pair;
  pair.mean1 = sol_without.theta();
  pair.mean2 = sol_with.theta();
  pair.cov1 = sol_without.solve_H_matrix() / gamma;
  pair.cov2 = sol_with.solve_H_matrix() / gamma;
  return pair;
}

}  // namespace pdp
