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
#ifndef PDP_EXPERIMENTS_HPP
#define PDP_EXPERIMENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

namespace pdp {

// Shared experiment parameters; loadable from key=value files ("#" starts a
// comment) and overridable by CLI flags.
struct ExperimentConfig {
  Eigen::Index n = 1000;
  Eigen::Index d = 5;
  double sigma_data = 0.1;
  double sigma_mech = 4.0;
  double gamma = 1.0;
  double lambda = 1.0;
  double eps_budget = 1.0;
  double delta = 1e-6;
  double kappa = 0.0;  // <= 0 means auto (90% of the AdaOPS cap)
  std::uint64_t seed = 42;
  int trials = 5000;
  std::int64_t mc_samples = 1000000;
  int instances = 3;      // random instances per Monte-Carlo check
  double eps_scale = 1.0; // verify-only mutation hook for the tested bounds
  std::string mechanism = "ops";
  std::string out = ".";
  std::string input;  // optional CSV input for the report command
};

// Applies one key=value setting; throws ParseError on unknown keys or
// unparsable values.
void apply_config_kv(ExperimentConfig& cfg, const std::string& key,
                     const std::string& value);

// Loads settings from a key=value file on top of cfg.
void load_config_file(ExperimentConfig& cfg, const std::string& path);

// Commands return 0 on success, 1 on invariant failure. Summaries go to out.
int cmd_fig1(const ExperimentConfig& cfg, std::ostream& log);
int cmd_fig2(const ExperimentConfig& cfg, std::ostream& log);
int cmd_efficiency(const ExperimentConfig& cfg, std::ostream& log);
int cmd_optgap(const ExperimentConfig& cfg, std::ostream& log);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& log);

// Per-row pDP report for cfg.mechanism on cfg.input (or synthetic data when
// cfg.input is empty); writes out/report.csv.
int cmd_report(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace pdp

#endif  // PDP_EXPERIMENTS_HPP
