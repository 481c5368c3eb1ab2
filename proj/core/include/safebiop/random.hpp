// Copyright 2026 The safebiop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SAFEBIOP_RANDOM_HPP
#define SAFEBIOP_RANDOM_HPP

#include <cstdint>
#include <random>

#include "safebiop/types.hpp"

namespace safebiop {

using Rng = std::mt19937_64;

/// Deterministic child seed for stream `index` of `master` (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// i.i.d. N(0, stddev^2) vector.
Vector gaussian_vector(Rng& rng, Eigen::Index n, double stddev = 1.0);

/// i.i.d. U[-bound, bound] vector.
Vector uniform_vector(Rng& rng, Eigen::Index n, double bound);

/**
 * @brief Draws bounded noise according to a NoiseSpec.
 *
 * Every returned entry lies in [-bound, bound]. Truncated Gaussian samples outside the bound are rejected.
 */
class NoiseSampler {
 public:
  NoiseSampler(const NoiseSpec& spec, std::uint64_t seed);

  Vector input_noise(Eigen::Index n);
  Vector output_noise(Eigen::Index n);

 private:
  Vector draw(Eigen::Index n, double bound);

  NoiseSpec spec_;
  Rng rng_;
};

}  // namespace safebiop

#endif  // SAFEBIOP_RANDOM_HPP
