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
#ifndef PDP_RNG_HPP
#define PDP_RNG_HPP

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace pdp {

// splitmix64 finalizer. Used everywhere a sub-seed is derived from a master
// seed so that streams for different purposes are decorrelated.
std::uint64_t mix64(std::uint64_t x);

// Seeded random stream with portable, reproducible draws. Gaussians come from
// a Box-Muller transform rather than std::normal_distribution, whose output
// sequence is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1).
  double uniform();
  // Standard normal.
  double gaussian();
  Eigen::VectorXd gaussian_vector(Eigen::Index n);

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pdp

#endif  // PDP_RNG_HPP
