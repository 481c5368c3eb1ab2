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


#ifndef SAFEBIOP_EXPCLI_CONFIG_HPP
#define SAFEBIOP_EXPCLI_CONFIG_HPP

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "safebiop/conic.hpp"
#include "safebiop/iop.hpp"
#include "safebiop/synthesis.hpp"
#include "safebiop/types.hpp"

namespace safebiop::expcli {

/// Schema violation, carrying the dotted path of the first offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ExperimentKind { SafeTrajectories, SCurve, EstimatorCompare, SuboptScaling, Custom };

const char* to_string(ExperimentKind kind);

struct ModelConfig {
  /// Set for the two-state benchmark family; otherwise A, B, C are explicit.
  std::optional<double> rho;
  Matrix A, B, C;
  Vector x0;

  StateSpaceModel build() const;
  /// Benchmark family with a different rho (explicit models ignore the argument).
  StateSpaceModel build(double rho_override) const;
};

struct DataConfig {
  int T = 100;
  int T_ini = 4;
  double input_std = 1.0;
  /// Gaussian data-noise variance on both input and output channels.
  double noise_variance = 0.0;
  Estimator estimator = Estimator::LeastSquares;
};

struct SafeTrajectoriesConfig {
  /// Size of the synthetic estimation error applied for the robust controller.
  double eps = 0.01;
  int rollouts = 50;
};

struct SCurveConfig {
  std::vector<double> eps_inf_grid;
};

struct EstimatorCompareConfig {
  std::vector<double> sigma_grid;  ///< variances
  int draws = 1000;
  double initial_state_std = 3.0;
};

struct SuboptScalingConfig {
  std::vector<double> rho_grid;
  std::vector<double> eps2_grid;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Custom;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output_dir;
  ModelConfig model;
  int horizon = 12;
  SafetyPolytope polytope;
  NoiseSpec noise;
  CostWeights weights;
  DataConfig data;
  SearchStrategy search = GridRandom{};
  conic::SolverOptions solver;
  SafeTrajectoriesConfig safe_trajectories;
  SCurveConfig s_curve;
  EstimatorCompareConfig estimator_compare;
  SuboptScalingConfig subopt_scaling;
  /// Parsed document, echoed into the run summary.
  nlohmann::json source;
};

/// Validates and converts a config document. Throws ConfigError on the first problem.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Reads UTF-8 JSON from disk; parse errors are reported as ConfigError at path "$".
nlohmann::json read_config_file(const std::string& path);

}  // namespace safebiop::expcli

#endif  // SAFEBIOP_EXPCLI_CONFIG_HPP
