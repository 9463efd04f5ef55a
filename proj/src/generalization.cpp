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
#include "pdp/generalization.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pdp/accounting.hpp"
#include "pdp/errors.hpp"
#include "pdp/ridge.hpp"
#include "pdp/rng.hpp"

namespace pdp {
namespace {

struct GroupMeans {
  double exp_eps = 0.0;
  double exp_2eps = 0.0;
  double eps = 0.0;
  double delta = 0.0;
};

std::map<int, GroupMeans> group_means(const PdpSampleSet& s) {
  std::map<int, GroupMeans> sums;
  std::map<int, int> counts;
  for (std::size_t i = 0; i < s.eps_samples.size(); ++i) {
    const int g = s.group[i];
    GroupMeans& m = sums[g];
    m.exp_eps += std::exp(s.eps_samples[i]);
    m.exp_2eps += std::exp(2.0 * s.eps_samples[i]);
    m.eps += s.eps_samples[i];
    m.delta += s.delta_samples[i];
    ++counts[g];
  }
  for (auto& [g, m] : sums) {
    const double c = static_cast<double>(counts[g]);
    m.exp_eps /= c;
    m.exp_2eps /= c;
    m.eps /= c;
    m.delta /= c;
  }
  return sums;
}

double clipped_loss(const Eigen::VectorXd& theta, const DataPoint& z) {
  const double r = z.y - z.x.dot(theta);
  return std::min(1.0, r * r);
}

}  // namespace

void PdpSampleSet::check() const {
  if (eps_samples.size() != delta_samples.size() ||
      eps_samples.size() != group.size()) {
    throw DimensionError("pDP sample vectors must have equal length");
  }
  if (eps_samples.empty()) throw ParamError("empty pDP sample set");
  for (std::size_t i = 0; i < eps_samples.size(); ++i) {
    if (!(eps_samples[i] >= 0.0) || !std::isfinite(eps_samples[i])) {
      throw ParamError("eps samples must be finite and nonnegative");
    }
    if (!(delta_samples[i] >= 0.0 && delta_samples[i] < 1.0)) {
      throw ParamError("delta samples must lie in [0, 1)");
    }
  }
}

void ImportanceWeights::check() const {
  for (double r : rho) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw ParamError("importance weights must be finite and nonnegative");
    }
  }
}

double gen_bound(const PdpSampleSet& samples) {
  samples.check();
  const auto means = group_means(samples);
  double sq_term = 0.0, delta_term = 0.0, cross_term = 0.0;
  for (const auto& [g, m] : means) {
    sq_term += m.exp_eps * m.exp_eps;
    delta_term += m.delta;
    cross_term += m.exp_eps * m.delta;
  }
  const double ng = static_cast<double>(means.size());
  return sq_term / ng - 1.0 + delta_term / ng + cross_term / ng;
}

CrossDomainBound crossdomain_bound(const PdpSampleSet& samples_base,
                                   const PdpSampleSet& samples_target) {
  samples_base.check();
  samples_target.check();
  const auto base = group_means(samples_base);
  const auto target = group_means(samples_target);

  CrossDomainBound out;
  double prop = 0.0;
  double n_common = 0.0;
  for (const auto& [g, b] : base) {
    auto it = target.find(g);
    if (it == target.end()) continue;
    const GroupMeans& t = it->second;
    // E[e^{eps' + eps''}] factors over the conditionally independent draws.
    prop += b.exp_eps * t.exp_eps - 1.0 + b.delta + b.eps * t.delta;
    n_common += 1.0;
  }
  if (n_common == 0.0) throw ParamError("sample sets share no groups");
  out.prop_value = prop / n_common;

  double e2_base = 0.0, e2_target = 0.0, delta_sup = 0.0;
  for (const auto& [g, m] : base) e2_base += m.exp_2eps;
  for (const auto& [g, m] : target) e2_target += m.exp_2eps;
  e2_base /= static_cast<double>(base.size());
  e2_target /= static_cast<double>(target.size());
  for (double dv : samples_base.delta_samples) delta_sup = std::max(delta_sup, dv);
  for (double dv : samples_target.delta_samples) delta_sup = std::max(delta_sup, dv);
  out.corollary_value = 0.5 * (e2_base + e2_target) - 1.0 + 2.0 * delta_sup;
  return out;
}

ThetaSampler make_mechanism_sampler(const MechanismSpec& spec) {
  switch (spec.kind) {
    case MechanismKind::kGaussian:
      return [spec](const Dataset& ds, std::uint64_t seed) {
        return output_perturb(fit_ridge(ds, spec.lambda), spec.design, spec.gamma, seed)
            .theta_tilde;
      };
    case MechanismKind::kOps:
      return [spec](const Dataset& ds, std::uint64_t seed) {
        return ops_sample(ds, spec.lambda, spec.gamma, seed).theta_tilde;
      };
    case MechanismKind::kObjPert:
      return [spec](const Dataset& ds, std::uint64_t seed) {
        return objpert_sample(ds, spec.sigma, spec.lambda, seed).theta_tilde;
      };
    case MechanismKind::kAdaOps:
      return [spec](const Dataset& ds, std::uint64_t seed) {
        return adaops(ds, spec.eps_budget, spec.delta, spec.kappa, seed).theta_tilde;
      };
  }
  throw ParamError("unknown mechanism kind");
}

GapEstimate empirical_gap(const ThetaSampler& sampler, const SyntheticConfig& cfg,
                          int trials, std::uint64_t seed) {
  return empirical_gap_weighted(sampler, cfg, cfg,
                                [](const DataPoint&) { return 1.0; }, trials, seed);
}

GapEstimate empirical_gap_weighted(const ThetaSampler& sampler,
                                   const SyntheticConfig& cfg_base,
                                   const SyntheticConfig& cfg_target,
                                   const std::function<double(const DataPoint&)>& rho,
                                   int trials, std::uint64_t seed) {
  if (trials <= 0) throw ParamError("trials must be positive");
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < trials; ++t) {
    SyntheticConfig train_cfg = cfg_base;
    train_cfg.seed = mix64(seed + 3 * static_cast<std::uint64_t>(t));
    const Dataset train = generate_linear_gaussian(train_cfg).first;

    SyntheticConfig fresh_cfg = cfg_target;
    fresh_cfg.n = 1;
    fresh_cfg.seed = mix64(seed + 3 * static_cast<std::uint64_t>(t) + 1);
    const DataPoint fresh = generate_linear_gaussian(fresh_cfg).first.point(0);

    const Eigen::VectorXd theta =
        sampler(train, mix64(seed + 3 * static_cast<std::uint64_t>(t) + 2));

    double train_loss = 0.0;
    for (Eigen::Index i = 0; i < train.n(); ++i) {
      const DataPoint z = train.point(i);
      train_loss += rho(z) * clipped_loss(theta, z);
    }
    train_loss /= static_cast<double>(train.n());
    const double diff = train_loss - clipped_loss(theta, fresh);
    sum += diff;
    sumsq += diff * diff;
  }
  const double n = static_cast<double>(trials);
  const double mean = sum / n;
  GapEstimate out;
  out.gap = std::abs(mean);
  out.stderr_ = std::sqrt(std::max(0.0, sumsq / n - mean * mean) / n);
  return out;
}

PdpSampleSet sample_pdp_set(const SyntheticConfig& cfg, double lambda, double gamma,
                            double delta, int n_groups, int z_per_group,
                            std::uint64_t seed) {
  return sample_pdp_set(cfg, cfg, lambda, gamma, delta, n_groups, z_per_group, seed);
}

PdpSampleSet sample_pdp_set(const SyntheticConfig& cfg_train,
                            const SyntheticConfig& cfg_target, double lambda,
                            double gamma, double delta, int n_groups,
                            int z_per_group, std::uint64_t seed) {
  if (n_groups <= 0 || z_per_group <= 0) throw ParamError("counts must be positive");
  PdpSampleSet set;
  for (int g = 0; g < n_groups; ++g) {
    SyntheticConfig train_cfg = cfg_train;
    train_cfg.seed = mix64(seed + 2 * static_cast<std::uint64_t>(g));
    const Dataset train = generate_linear_gaussian(train_cfg).first;
    const RidgeSolution sol = fit_ridge(train, lambda);

    SyntheticConfig fresh_cfg = cfg_target;
    fresh_cfg.n = z_per_group;
    fresh_cfg.seed = mix64(seed + 2 * static_cast<std::uint64_t>(g) + 1);
    const Dataset fresh = generate_linear_gaussian(fresh_cfg).first;
    for (Eigen::Index j = 0; j < fresh.n(); ++j) {
      const OpsPdpBound b = ops_pdp_bound(sol, fresh.point(j), gamma, delta);
      set.eps_samples.push_back(b.eps);
      set.delta_samples.push_back(delta);
      set.group.push_back(g);
    }
  }
  return set;
}

}  // namespace pdp
