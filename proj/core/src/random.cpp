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

#include "safebiop/random.hpp"

#include <cmath>

namespace safebiop {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vector gaussian_vector(Rng& rng, Eigen::Index n, double stddev) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = stddev * dist(rng);
  return out;
}

Vector uniform_vector(Rng& rng, Eigen::Index n, double bound) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = bound * dist(rng);
  return out;
}

NoiseSampler::NoiseSampler(const NoiseSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {
  spec_.validate();
}

Vector NoiseSampler::input_noise(Eigen::Index n) { return draw(n, spec_.w_inf); }

Vector NoiseSampler::output_noise(Eigen::Index n) { return draw(n, spec_.v_inf); }

Vector NoiseSampler::draw(Eigen::Index n, double bound) {
  if (bound == 0.0) return Vector::Zero(n);
  if (spec_.distribution == NoiseDistribution::UniformBounded) return uniform_vector(rng_, n, bound);
  std::normal_distribution<double> dist(0.0, spec_.sigma);
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double x = dist(rng_);
    while (std::abs(x) > bound) x = dist(rng_);
    out(i) = x;
  }
  return out;
}

}  // namespace safebiop
