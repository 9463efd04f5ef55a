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
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdp/errors.hpp"
#include "pdp/experiments.hpp"

namespace {

struct Overrides {
  std::string config;
  std::map<std::string, std::string> kv;
};

void add_common_flags(CLI::App* sub, Overrides& ov) {
  sub->add_option("--config", ov.config, "key=value config file");
  auto capture = [&ov](const std::string& key) {
    return [&ov, key](const std::string& value) { ov.kv[key] = value; };
  };
  sub->add_option_function<std::string>("--n", capture("n"), "rows");
  sub->add_option_function<std::string>("--d", capture("d"), "feature dimension");
  sub->add_option_function<std::string>("--seed", capture("seed"), "master seed");
  sub->add_option_function<std::string>("--delta", capture("delta"), "privacy delta");
  sub->add_option_function<std::string>("--gamma", capture("gamma"), "noise scale gamma");
  sub->add_option_function<std::string>("--lambda", capture("lambda"), "ridge lambda");
  sub->add_option_function<std::string>("--sigma", capture("sigma_mech"),
                                        "mechanism noise sigma");
  sub->add_option_function<std::string>("--sigma-data", capture("sigma_data"),
                                        "generator noise sigma");
  sub->add_option_function<std::string>("--eps-budget", capture("eps_budget"),
                                        "AdaOPS epsilon budget");
  sub->add_option_function<std::string>("--kappa", capture("kappa"), "AdaOPS kappa");
  sub->add_option_function<std::string>("--trials", capture("trials"), "Monte-Carlo trials");
  sub->add_option_function<std::string>("--mc-samples", capture("mc_samples"),
                                        "hockey-stick samples");
  sub->add_option_function<std::string>("--instances", capture("instances"),
                                        "random instances per verification check");
  sub->add_option_function<std::string>("--eps-scale", capture("eps_scale"),
                                        "scale factor applied to verified bounds");
  sub->add_option_function<std::string>("--mechanism", capture("mechanism"),
                                        "gauss-iso|gauss-democratic|gauss-fisher|"
                                        "ops|objpert|adaops");
  sub->add_option_function<std::string>("--out", capture("out"), "output directory");
  sub->add_option_function<std::string>("--input", capture("input"),
                                        "input CSV (report command)");
}

pdp::ExperimentConfig build_config(const Overrides& ov) {
  pdp::ExperimentConfig cfg;
  if (!ov.config.empty()) pdp::load_config_file(cfg, ov.config);
  for (const auto& [key, value] : ov.kv) pdp::apply_config_kv(cfg, key, value);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"per-instance DP accounting for linear and ridge regression"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const pdp::ExperimentConfig&, std::ostream&);
  };
  const std::vector<Command> commands = {
      {"fig1", "output-perturbation pDP vs DP summary", pdp::cmd_fig1},
      {"fig2", "gamma sweep: Gaussian designs and OPS vs agnostic DP", pdp::cmd_fig2},
      {"efficiency", "OPS/AdaOPS mean-squared error vs closed form", pdp::cmd_efficiency},
      {"optgap", "excess empirical risk of OPS", pdp::cmd_optgap},
      {"verify", "invariant and Monte-Carlo certification suite", pdp::cmd_verify},
      {"report", "per-row pDP report for one mechanism", pdp::cmd_report},
  };

  std::vector<Overrides> overrides(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].name, commands[i].help);
    add_common_flags(sub, overrides[i]);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      const pdp::ExperimentConfig cfg = build_config(overrides[i]);
      return commands[i].run(cfg, std::cout);
    } catch (const pdp::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    } catch (const pdp::IoError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    } catch (const pdp::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 2;
}
