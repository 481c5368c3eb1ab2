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


#ifndef SAFEBIOP_SYNTHESIS_HPP
#define SAFEBIOP_SYNTHESIS_HPP

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "safebiop/behavior.hpp"
#include "safebiop/conic.hpp"
#include "safebiop/iop.hpp"

namespace safebiop {

/// gamma caps ||Phi_uy||_2, tau caps ||Phi_uy||_inf, alpha replaces gamma inside h(). +inf means no cap.
struct HyperParams {
  double gamma = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
};

enum class SynthesisStatus { Optimal, Infeasible, SolverFailure };

const char* to_string(SynthesisStatus status);

/**
 * @brief Terms of the relative suboptimality bound.
 */
struct BoundTerms {
  double eta = 0.0;
  double zeta = 0.0;
  double M_c = 0.0;
  double V_c = 0.0;
  double S_eps = 0.0;  ///< +inf when the oracle program is infeasible
  double bound_value = 0.0;
  /// False when eta < 1/5, zeta < 1/2 or the alpha interval fails.
  bool certified = false;
};

struct SynthesisResult {
  SynthesisStatus status = SynthesisStatus::Infeasible;
  Matrix controller;  ///< (mN) x (pN), block lower triangular
  ClosedLoopMaps maps_hat;
  HyperParams hyper;
  double j_robust = 0.0;  ///< j_inner / (1 - eps2 gamma)
  double j_inner = 0.0;
  std::optional<BoundTerms> diagnostics;
  int p = 1;
  int m = 1;
  int N = 1;
  /// Number of conic programs solved to produce this result.
  int solves = 0;
  int solver_iterations = 0;
};

nlohmann::json to_json(const HyperParams& h);
nlohmann::json to_json(const BoundTerms& b);
/// Controller stored row-major with its block dimensions.
nlohmann::json to_json(const SynthesisResult& r);

struct SynthesisOptions {
  conic::SolverOptions solver;
  /// Worker threads for hyper-parameter sweeps.
  int threads = 1;
};

/// Minimizes the weighted closed-loop cost on (G_hat, y0) subject to the worst-case safety rows.
SynthesisResult solve_nominal(const Matrix& g_column, const Vector& y0, const SafetyPolytope& polytope,
                              const NoiseSpec& noise, const CostWeights& weights, const SynthesisOptions& options = {});

/// Inner program for fixed hyper-parameters. Requires R = r I and unit noise covariances.
SynthesisResult solve_robust_inner(const EstimateBundle& bundle, const SafetyPolytope& polytope,
                                   const NoiseSpec& noise, const CostWeights& weights, const HyperParams& hyper,
                                   const SynthesisOptions& options = {});

/// j_inner / (1 - eps2 gamma), +inf when the inner program has no solution.
double robust_cost(const EstimateBundle& bundle, const SafetyPolytope& polytope, const NoiseSpec& noise,
                   const CostWeights& weights, const HyperParams& hyper, const SynthesisOptions& options = {});

/// n_points uniform draws of (gamma, tau). Unless alpha is given, h() is evaluated at gamma itself.
struct GridRandom {
  int n_points = 100;
  std::uint64_t seed = 0;
  std::optional<double> alpha;
};

/// Golden-section search over gamma in [0, min(alpha, (1 - 1e-6) / eps2)] for every tau in the grid.
struct GoldenGamma {
  /// Empty: 32 log-spaced values in [1e-3, 0.999] / eps_inf plus 0.
  std::vector<double> tau_grid;
  int iterations = 40;
  /// Fixed alpha; default 0.999 / eps2.
  std::optional<double> alpha;
  /// alpha = k ||Phi_uy||_2 of the nominal solution on (G_hat, y0_hat), clamped below 1 / eps2.
  std::optional<double> alpha_nominal_multiple;
};

using SearchStrategy = std::variant<GridRandom, GoldenGamma>;

SynthesisResult search_hyperparams(const EstimateBundle& bundle, const SafetyPolytope& polytope,
                                   const NoiseSpec& noise, const CostWeights& weights,
                                   const SearchStrategy& strategy, const SynthesisOptions& options = {});

/// Golden-section minimization of f over [a, b]; returns the best evaluated point.
std::pair<double, double> golden_section(const std::function<double(double)>& f, double a, double b,
                                         int iterations);

/// Norms of the optimal nominal Phi_uy on the true plant.
struct PhiStarNorms {
  double norm2 = 0.0;
  double norm_inf = 0.0;
};

struct OracleResult {
  SynthesisStatus status = SynthesisStatus::Infeasible;
  ClosedLoopMaps maps;
  Matrix controller;
};

/// Oracle program on the true plant with doubly tightened rows and norm caps. Requires zeta < 1/2.
OracleResult solve_tightened_oracle(const OracleErrors& truth, const EstimateBundle& bundle,
                                    const SafetyPolytope& polytope, const NoiseSpec& noise,
                                    const CostWeights& weights, const PhiStarNorms& phi_star,
                                    const SynthesisOptions& options = {});

struct SPoint {
  double eps_inf = 0.0;
  double S = 0.0;  ///< +inf when infeasible
  bool feasible = false;
};

/// S(eps_inf) over a grid; the bundle's eps_inf is replaced by each grid value.
std::vector<SPoint> suboptimality_gap_S(const OracleErrors& truth, const EstimateBundle& bundle,
                                        const SafetyPolytope& polytope, const NoiseSpec& noise,
                                        const CostWeights& weights, const std::vector<double>& eps_inf_grid,
                                        const SynthesisOptions& options = {});

struct BoundInputs {
  PhiStarNorms phi_star;
  double eps2 = 0.0;
  double eps_inf = 0.0;
  double alpha = 0.0;
  double G_hat_norm2 = 0.0;
  double y0_hat_norm2 = 0.0;
  double G_norm2 = 0.0;
  double y0_norm2 = 0.0;
  /// ||Phi^c_uy||_2 of the oracle solution.
  double phi_c_norm2 = 0.0;
  double S_eps = 0.0;
};

BoundTerms theoretical_bound(const BoundInputs& in);

struct ExplorationResult {
  SynthesisStatus status = SynthesisStatus::Infeasible;
  Matrix K_r;
  SynthesisResult synthesis;
};

/// Robust synthesis with w_inf inflated by the exploration bound eta_inf.
ExplorationResult safe_exploration_policy(const EstimateBundle& rough_bundle, double eta_inf,
                                          const SafetyPolytope& polytope, const NoiseSpec& noise,
                                          const CostWeights& weights, const SearchStrategy& strategy,
                                          const SynthesisOptions& options = {});

}  // namespace safebiop

#endif  // SAFEBIOP_SYNTHESIS_HPP
