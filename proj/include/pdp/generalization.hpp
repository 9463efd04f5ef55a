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
#ifndef PDP_GENERALIZATION_HPP
#define PDP_GENERALIZATION_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "pdp/dataset.hpp"
#include "pdp/mechanisms.hpp"

namespace pdp {

// Draws of the per-instance privacy losses (eps(Z, z), delta(Z, z)), grouped
// by the data set Z they were measured against.
struct PdpSampleSet {
  std::vector<double> eps_samples;
  std::vector<double> delta_samples;
  std::vector<int> group;  // group[i] = index of the Z behind sample i

  void check() const;  // lengths consistent, delta in [0,1), eps >= 0
};

// Plug-in estimate of the moment-pDP generalization bound:
// E_Z (E[e^eps | Z])^2 - 1 + E delta + E_Z E[e^eps | Z] E[delta | Z].
double gen_bound(const PdpSampleSet& samples);

struct CrossDomainBound {
  double prop_value = 0.0;       // E[(e^{eps'+eps''} - 1) + delta' + eps' delta'']
  double corollary_value = 0.0;  // (E_D e^{2 eps} + E_D' e^{2 eps}) / 2 - 1 + 2 sup delta
};

// Cross-domain bound from samples under the base and target distributions.
// Group structure must match between the two sets (same Z indices).
CrossDomainBound crossdomain_bound(const PdpSampleSet& samples_base,
                                   const PdpSampleSet& samples_target);

// One randomized-estimator draw given training data and a seed.
using ThetaSampler = std::function<Eigen::VectorXd(const Dataset&, std::uint64_t)>;

ThetaSampler make_mechanism_sampler(const MechanismSpec& spec);

struct GapEstimate {
  double gap = 0.0;       // |E train loss - E fresh loss|, clipped losses
  double stderr_ = 0.0;   // Monte-Carlo standard error of the signed mean
};

// On-average generalization gap with the clipped squared loss
// min(1, (y - x^T theta)^2), estimated over independent trials.
GapEstimate empirical_gap(const ThetaSampler& sampler, const SyntheticConfig& cfg,
                          int trials, std::uint64_t seed);

// Importance weights rho_i = D'(z_i) / D(z_i).
struct ImportanceWeights {
  std::vector<double> rho;

  void check() const;  // nonnegative, finite
};

// Cross-domain gap: fresh points are drawn from the target generator and the
// train-side average is reweighted by rho(z_i).
GapEstimate empirical_gap_weighted(const ThetaSampler& sampler,
                                   const SyntheticConfig& cfg_base,
                                   const SyntheticConfig& cfg_target,
                                   const std::function<double(const DataPoint&)>& rho,
                                   int trials, std::uint64_t seed);

// Draws pDP loss samples for the OPS bound on a synthetic generator:
// n_groups data sets, z_per_group fresh targets each, eps = the min of the
// two posterior-sampling bound expressions, delta fixed.
PdpSampleSet sample_pdp_set(const SyntheticConfig& cfg, double lambda, double gamma,
                            double delta, int n_groups, int z_per_group,
                            std::uint64_t seed);

// Cross-domain variant: training sets from cfg_train, targets from cfg_target.
PdpSampleSet sample_pdp_set(const SyntheticConfig& cfg_train,
                            const SyntheticConfig& cfg_target, double lambda,
                            double gamma, double delta, int n_groups,
                            int z_per_group, std::uint64_t seed);

}  // namespace pdp

#endif  // PDP_GENERALIZATION_HPP
