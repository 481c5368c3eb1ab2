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


#ifndef SAFEBIOP_EXPCLI_RUN_HPP
#define SAFEBIOP_EXPCLI_RUN_HPP

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "safebiop/behavior.hpp"
#include "safebiop/random.hpp"
#include "safebiop/types.hpp"

namespace safebiop::expcli {

enum class RunStatus { Ok, Infeasible, SolverFailure };

const char* to_string(RunStatus status);

/// 0, 3 or 4.
int exit_code(RunStatus status);

struct EmittedFile {
  std::string name;
  std::size_t rows = 0;
  /// SHA-1 of "blob <size>\0<content>", as computed by git hash-object.
  std::string hash;
};

struct RunSummary {
  RunStatus status = RunStatus::Ok;
  /// Per-experiment scalar results.
  nlohmann::json results = nlohmann::json::object();
  /// Wall-clock seconds per phase.
  nlohmann::json timings = nlohmann::json::object();
  nlohmann::json solver = nlohmann::json::object();
  std::vector<EmittedFile> files;
  nlohmann::json config;
  std::string output_dir;

  nlohmann::json to_json() const;
};

struct RunOptions {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  /// When false nothing is written to disk; hashes and row counts are still reported.
  bool write_files = true;
};

/// Runs the configured experiment and writes its CSVs plus summary.json.
RunSummary run(const ExperimentConfig& config, const RunOptions& options = {});

/// Git blob hash of a byte string.
std::string git_blob_hash(const std::string& content);

/// Stable 64-bit tag for a stream name (FNV-1a), used with derive_seed.
std::uint64_t stream_tag(const std::string& name);

/// Historical experiment and recent window with the ground truth they imply.
struct CollectedData {
  DataRecord record;
  OracleErrors truth;
};

/**
 * @brief Open-loop data collection.
 *
 * The historical run starts at rest. The recent window starts at `recent_start` and is driven by `recent_u`.
 * Gaussian data noise of the configured variance enters on both the input and the output.
 */
CollectedData collect_data(const StateSpaceModel& model, const DataConfig& data, int horizon,
                           const SignalTrajectory& historical_u, const SignalTrajectory& recent_u,
                           const Vector& recent_start, std::uint64_t noise_seed);

/// Start state so that, without noise, the recent window ends at model.x0. Needs an invertible A.
Vector recent_start_reaching(const StateSpaceModel& model, const SignalTrajectory& recent_u);

/// Random strictly causal block-Toeplitz column scaled so that max(||T||_2, ||T||_inf) = eps.
Matrix random_toeplitz_perturbation(Rng& rng, int p, int m, int N, double eps);
/// Random vector scaled so that max(||v||_2, ||v||_inf) = eps.
Vector random_vector_perturbation(Rng& rng, Eigen::Index n, double eps);

/// Least-squares slope of log(y) against log(x) over the points with finite positive y.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace safebiop::expcli

#endif  // SAFEBIOP_EXPCLI_RUN_HPP
