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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "pdp/errors.hpp"
#include "pdp/experiments.hpp"

using namespace pdp;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Per-row eps column of a report CSV.
std::vector<double> eps_column(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto pos = line.rfind(',');
    out.push_back(std::stod(line.substr(pos + 1)));
  }
  return out;
}

ExperimentConfig small_cfg(const std::string& out) {
  ExperimentConfig cfg;
  cfg.n = 300;
  cfg.d = 4;
  cfg.trials = 400;
  cfg.mc_samples = 50000;
  cfg.out = out;
  return cfg;
}

}  // namespace

TEST_CASE("config files parse key=value lines with comments") {
  const auto dir = temp_dir("cfgtest");
  const auto path = dir / "run.cfg";
  std::ofstream(path) << "# experiment settings\nn = 123\ngamma=0.25  # inline\n"
                      << "mechanism=gauss-iso\n\n";
  ExperimentConfig cfg;
  load_config_file(cfg, path.string());
  CHECK(cfg.n == 123);
  CHECK(cfg.gamma == 0.25);
  CHECK(cfg.mechanism == "gauss-iso");

  std::ofstream(path) << "bogus_key=1\n";
  CHECK_THROWS_AS(load_config_file(cfg, path.string()), ParseError);
  std::ofstream(path) << "n=notanumber\n";
  CHECK_THROWS_AS(load_config_file(cfg, path.string()), ParseError);
  CHECK_THROWS_AS(load_config_file(cfg, (dir / "missing.cfg").string()), IoError);
}

TEST_CASE("fig1 is deterministic per seed and satisfies its gap invariants") {
  const auto dir1 = temp_dir("fig1a");
  const auto dir2 = temp_dir("fig1b");
  ExperimentConfig cfg = small_cfg(dir1.string());
  std::ostringstream log;
  CHECK(cmd_fig1(cfg, log) == 0);
  cfg.out = dir2.string();
  CHECK(cmd_fig1(cfg, log) == 0);
  CHECK(slurp(dir1 / "fig1_points.csv") == slurp(dir2 / "fig1_points.csv"));
  CHECK(slurp(dir1 / "fig1_summary.csv") == slurp(dir2 / "fig1_summary.csv"));
}

TEST_CASE("doubling the mechanism sigma rescales the eps column by 1/4") {
  // gamma = 1/sigma^2, and the printed formula is linear in gamma, so doubling
  // sigma scales every per-row eps by exactly 0.25.
  const auto dir1 = temp_dir("fig1s4");
  const auto dir2 = temp_dir("fig1s8");
  ExperimentConfig cfg = small_cfg(dir1.string());
  std::ostringstream log;
  CHECK(cmd_fig1(cfg, log) == 0);
  cfg.sigma_mech = 8.0;
  cfg.out = dir2.string();
  CHECK(cmd_fig1(cfg, log) == 0);
  const auto a = eps_column(dir1 / "fig1_points.csv");
  const auto b = eps_column(dir2 / "fig1_points.csv");
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i] == doctest::Approx(0.25 * a[i]).epsilon(1e-12));
  }
}

TEST_CASE("fig2 emits both panes and passes its assertions") {
  const auto dir = temp_dir("fig2t");
  ExperimentConfig cfg = small_cfg(dir.string());
  cfg.trials = 300;
  std::ostringstream log;
  CHECK(cmd_fig2(cfg, log) == 0);
  CHECK(std::filesystem::exists(dir / "fig2_left.csv"));
  CHECK(std::filesystem::exists(dir / "fig2_right.csv"));
}

TEST_CASE("efficiency and optgap match their closed forms") {
  const auto dir = temp_dir("efft");
  // Full trial count: the Cramer-Rao ratio check needs the Monte-Carlo error
  // on the mean squared error to sit well inside its fixed 2% tolerance.
  ExperimentConfig cfg;
  cfg.out = dir.string();
  std::ostringstream log;
  CHECK(cmd_efficiency(cfg, log) == 0);
  CHECK(cmd_optgap(cfg, log) == 0);
  CHECK(std::filesystem::exists(dir / "efficiency.csv"));
  CHECK(std::filesystem::exists(dir / "optgap.csv"));
}

TEST_CASE("verify passes clean and fails under the eps mutation hook") {
  const auto dir = temp_dir("verifyt");
  ExperimentConfig cfg = small_cfg(dir.string());
  std::ostringstream log;
  CHECK(cmd_verify(cfg, log) == 0);
  const std::string text = log.str();
  CHECK(text.find("PASS ops-bounds-mc") != std::string::npos);
  CHECK(text.find("n_samples=") != std::string::npos);
  CHECK(text.find("stderr=") != std::string::npos);

  cfg.eps_scale = 0.5;
  std::ostringstream log2;
  CHECK(cmd_verify(cfg, log2) == 1);
  CHECK(log2.str().find("FAIL") != std::string::npos);
}

TEST_CASE("report command writes the per-row CSV") {
  const auto dir = temp_dir("reportt");
  ExperimentConfig cfg = small_cfg(dir.string());
  cfg.mechanism = "ops";
  std::ostringstream log;
  CHECK(cmd_report(cfg, log) == 0);
  std::ifstream in(dir / "report.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "index,mu,mu_prime,residual,eps");
}
