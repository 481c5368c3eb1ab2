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

#ifndef SAFEBIOP_BEHAVIOR_HPP
#define SAFEBIOP_BEHAVIOR_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "safebiop/types.hpp"

namespace safebiop {

/// Raised when the data cannot support the requested estimate (e.g. rank-deficient input Hankel).
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

/// Default relative rank threshold: singular values below 1e-10 * sigma_max are treated as zero.
inline constexpr double kRankTolerance = 1e-10;

/**
 * @brief Historical experiment plus the most recent T_ini samples.
 */
struct DataRecord {
  SignalTrajectory historical_u;
  SignalTrajectory historical_y;
  SignalTrajectory recent_u;
  SignalTrajectory recent_y;
  int T_ini = 1;
  int N = 1;

  int m() const { return historical_u.dim; }
  int p() const { return historical_y.dim; }
  int T() const { return historical_u.length(); }

  void validate() const;
  /// T >= (m+1)(n + T_ini + N) - 1.
  bool satisfies_length_prerequisite(int n) const;
};

struct HankelPartition {
  Matrix U_p;
  Matrix U_f;
  Matrix Y_p;
  Matrix Y_f;
};

/**
 * @brief Output of an estimator. Component errors are filled in by assess_errors.
 */
struct EstimateBundle {
  Matrix g_column;  ///< (pN) x m
  Vector y0_hat;    ///< pN
  double eps2 = 0.0;
  double eps_inf = 0.0;
  std::optional<double> eps2_G;
  std::optional<double> eps_inf_G;
  std::optional<double> eps2_y;
  std::optional<double> eps_inf_y;
  bool errors_set = false;
  /// Output block size.
  int p = 1;

  int N() const { return static_cast<int>(g_column.rows() / p); }
  int m() const { return static_cast<int>(g_column.cols()); }
};

/// Depth-L block Hankel matrix, block (i, j) = signal(i + j).
Matrix build_hankel(const SignalTrajectory& signal, int L);

struct PEReport {
  bool is_pe = false;
  int rank = 0;
  Vector singular_values;
};

PEReport check_pe(const SignalTrajectory& input, int L, double rel_tol = kRankTolerance);

HankelPartition partition_data(const DataRecord& record);

/// SVD pseudoinverse, singular values below rel_tol * sigma_max are dropped.
Matrix pseudo_inverse(const Matrix& M, double rel_tol = kRankTolerance);

EstimateBundle estimate_ls(const HankelPartition& part, const DataRecord& record);

struct MlOptions {
  int max_iterations = 20;
  double rel_tol = 1e-8;
};

/// Gaussian-surrogate likelihood estimator; sigma is the output-noise standard deviation.
EstimateBundle estimate_ml(const HankelPartition& part, const DataRecord& record, double sigma,
                           const MlOptions& options = {});

enum class Estimator { LeastSquares, MaximumLikelihood };

struct OracleErrors {
  Matrix truth_column;
  Vector y0;
};

struct BootstrapErrors {
  const DataRecord* record = nullptr;
  Estimator estimator = Estimator::LeastSquares;
  /// Output-noise standard deviation used to perturb the data (and by the ML estimator).
  double sigma = 0.0;
  int resamples = 200;
  double percentile = 90.0;
  std::uint64_t seed = 0;
};

using ErrorMode = std::variant<OracleErrors, BootstrapErrors>;

/// Fills eps2 = max(eps2_G, eps2_y) and eps_inf = max(eps_inf_G, eps_inf_y).
EstimateBundle assess_errors(const EstimateBundle& bundle, const ErrorMode& mode);

/// Linear-interpolation percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

/// Writes one signal as CSV with header `t,dim_0,...`.
void write_signal_csv(const std::string& path, const SignalTrajectory& signal);
SignalTrajectory read_signal_csv(const std::string& path);

/// historical_u.csv, historical_y.csv, recent_u.csv, recent_y.csv inside `dir`.
void save_record(const std::string& dir, const DataRecord& record);
DataRecord load_record(const std::string& dir, int T_ini, int N);

}  // namespace safebiop

#endif  // SAFEBIOP_BEHAVIOR_HPP
