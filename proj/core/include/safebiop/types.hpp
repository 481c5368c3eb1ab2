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

#ifndef SAFEBIOP_TYPES_HPP
#define SAFEBIOP_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace safebiop {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when operand shapes disagree. The message names the offending dimension.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Throws DimensionError("<what>: expected <expected>, got <got>") when the sizes differ.
void require_dim(const std::string& what, Eigen::Index expected, Eigen::Index got);

/**
 * @brief Stacked multi-channel signal. Block t occupies entries [t*dim, (t+1)*dim).
 */
struct SignalTrajectory {
  Vector values;
  int dim = 1;

  SignalTrajectory() = default;
  SignalTrajectory(Vector v, int d);

  /// Number of time samples.
  int length() const;
  Vector at(int t) const;
  void set(int t, const Vector& value);

  static SignalTrajectory zeros(int dim, int length);
};

/**
 * @brief Discrete-time LTI model x(t+1) = A x(t) + B u(t), y(t) = C x(t).
 */
struct StateSpaceModel {
  Matrix A;
  Matrix B;
  Matrix C;
  Vector x0;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }

  /// Throws DimensionError on inconsistent shapes and std::invalid_argument on non-finite entries.
  void validate() const;
};

/// The double-integrator-like benchmark A = rho*[[1, .25],[0, 1]], B = [0; .1], C = [1, -1].
StateSpaceModel benchmark_model(double rho, const Vector& x0);

enum class NoiseDistribution { UniformBounded, TruncatedGaussian };

/**
 * @brief Bounded disturbance description. w acts on the input, v on the output.
 */
struct NoiseSpec {
  double w_inf = 0.0;
  double v_inf = 0.0;
  NoiseDistribution distribution = NoiseDistribution::UniformBounded;
  /// Standard deviation before truncation (TruncatedGaussian only).
  double sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/**
 * @brief Per-time polytope {F_y y <= b_y, F_u u <= b_u}.
 *
 * The rows are enforced at the listed time steps. An empty step list means every step.
 */
struct SafetyPolytope {
  Matrix F_y;
  Vector b_y;
  Matrix F_u;
  Vector b_u;
  std::vector<int> y_steps;
  std::vector<int> u_steps;

  void validate(int p, int m) const;
  /// Box |y_i| <= y_bound, |u_i| <= u_bound.
  static SafetyPolytope box(int p, int m, double y_bound, double u_bound);
  /// No rows at all.
  static SafetyPolytope empty(int p, int m);
};

/**
 * @brief The polytope written over stacked trajectories: Fy * y_stacked <= by, Fu * u_stacked <= bu.
 */
struct StackedConstraints {
  Matrix Fy;  ///< rows x (p N)
  Vector by;
  Matrix Fu;  ///< rows x (m N)
  Vector bu;
};

StackedConstraints stack_polytope(const SafetyPolytope& poly, int p, int m, int N);

}  // namespace safebiop

#endif  // SAFEBIOP_TYPES_HPP
