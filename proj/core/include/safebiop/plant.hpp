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

#ifndef SAFEBIOP_PLANT_HPP
#define SAFEBIOP_PLANT_HPP

#include <vector>

#include "safebiop/types.hpp"

namespace safebiop {

struct OpenLoopResult {
  SignalTrajectory outputs;
  SignalTrajectory states;  ///< x(0) .. x(T-1)
  Vector w;                 ///< drawn input noise, stacked
  Vector v;                 ///< drawn output noise, stacked
};

/// y(t) = C x(t) + v(t), x(t+1) = A x(t) + B (u(t) + w(t)), x(0) = model.x0.
OpenLoopResult simulate_open_loop(const StateSpaceModel& model, const SignalTrajectory& inputs,
                                  const NoiseSpec& noise);

/// Same recursion with caller-supplied noise sequences (stacked, same length as the inputs).
OpenLoopResult simulate_open_loop(const StateSpaceModel& model, const SignalTrajectory& inputs,
                                  const Vector& w, const Vector& v);

/// First block column of the plant Toeplitz matrix: block 0 is zero, block k is C A^{k-1} B. Size (pN) x m.
Matrix true_impulse_response(const StateSpaceModel& model, int N);

/// Stacked C A^t x0 for t = 0..N-1.
Vector true_free_response(const StateSpaceModel& model, int N);

struct ClosedLoopRollout {
  SignalTrajectory y;
  SignalTrajectory u;  ///< applied input K y + w
  Vector w;
  Vector v;
};

/// Throws std::invalid_argument unless K is (mN) x (pN) and block lower triangular.
void require_causal(const Matrix& K, int m, int p, int N);

/**
 * @brief Rolls out u = K y + w in time order. Realization r uses the seed derive_seed(noise.seed, r).
 */
std::vector<ClosedLoopRollout> simulate_closed_loop(const StateSpaceModel& model, const Matrix& K,
                                                    const NoiseSpec& noise, int realizations);

/// Single rollout with given stacked noise sequences.
ClosedLoopRollout simulate_closed_loop(const StateSpaceModel& model, const Matrix& K, const Vector& w,
                                       const Vector& v);

struct SafetyReport {
  /// Slack b - F*signal per constrained (step, row); layout row-major by step.
  std::vector<double> y_slack;
  std::vector<double> u_slack;
  double min_slack = 0.0;
  bool all_safe = true;
  /// First violated step (-1 if none).
  int first_violation_step = -1;
};

SafetyReport check_safety(const SignalTrajectory& y, const SignalTrajectory& u, const SafetyPolytope& poly);

}  // namespace safebiop

#endif  // SAFEBIOP_PLANT_HPP
