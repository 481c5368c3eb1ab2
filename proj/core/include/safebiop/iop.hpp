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

#ifndef SAFEBIOP_IOP_HPP
#define SAFEBIOP_IOP_HPP

#include <vector>

#include "safebiop/types.hpp"

namespace safebiop {

/// Max row 1-norm.
double inf_norm(const Matrix& M);
/// Largest singular value.
double spectral_norm(const Matrix& M);

/**
 * @brief Block-Toeplitz operator given by its first block column.
 */
struct ToeplitzOperator {
  Matrix first_block_column;  ///< (pN) x m
  int p = 1;
  int m = 1;
  int N = 1;

  ToeplitzOperator() = default;
  ToeplitzOperator(Matrix column, int p);

  Matrix expand() const;
};

/// (pN) x (mN) matrix with block (i, j) = column block (i - j) for i >= j.
Matrix toeplitz_expand(const ToeplitzOperator& op);

/// The four closed-loop maps from (v, w) to (y, u).
struct ClosedLoopMaps {
  Matrix yy;  ///< (pN) x (pN)
  Matrix yu;  ///< (pN) x (mN)
  Matrix uy;  ///< (mN) x (pN)
  Matrix uu;  ///< (mN) x (mN)
};

/// (I - GK)^{-1}, (I - GK)^{-1} G, K (I - GK)^{-1}, (I - KG)^{-1} by forward substitution.
ClosedLoopMaps responses_from_controller(const Matrix& K, const ToeplitzOperator& G);

/// K = Phi_uy Phi_yy^{-1} with a triangular solve.
Matrix controller_from_responses(const ClosedLoopMaps& maps);

/// Completes an achievable set of maps from Phi_uy: yy = I + G uy, yu = yy G, uu = I + uy G.
ClosedLoopMaps maps_from_phi_uy(const Matrix& phi_uy, const Matrix& G);

struct AchievabilityResidual {
  double r1 = 0.0;  ///< ||[I, -G] Phi - [I, 0]||_F
  double r2 = 0.0;  ///< ||Phi [-G; I] - [0; I]||_F
};

AchievabilityResidual achievability_residual(const ClosedLoopMaps& maps, const ToeplitzOperator& G);
AchievabilityResidual achievability_residual(const ClosedLoopMaps& maps, const Matrix& G);

/**
 * @brief Quadratic cost weights and noise covariances, one block per time step.
 */
struct CostWeights {
  std::vector<Matrix> Q_blocks;
  std::vector<Matrix> R_blocks;
  Matrix Sigma_v;
  Matrix Sigma_w;

  static CostWeights identity(int p, int m, int N);
  void validate(int p, int m, int N) const;

  /// Block-diagonal square roots over the horizon.
  Matrix Q_sqrt() const;
  Matrix R_sqrt() const;
  Matrix Sigma_v_sqrt(int N) const;
  Matrix Sigma_w_sqrt(int N) const;

  bool is_identity() const;
};

/// ||diag(Q^1/2, R^1/2) Phi [Sv^1/2 0 y0; 0 Sw^1/2 0]||_F.
double cost_j(const ClosedLoopMaps& maps, const Vector& y0, const CostWeights& weights);

/// Weighted h-inflated Frobenius norm with multipliers sqrt(1 + h_G + h_y) on yy and sqrt(1 + h_y) on uy.
double inner_cost(const ClosedLoopMaps& maps_hat, const Vector& y0_hat, double h_G, double h_y,
                  const CostWeights& weights);

/// Per stacked row: y side and u side.
struct SafetyLhs {
  Vector y;
  Vector u;
};

/// v_inf ||f Phi_yy||_1 + w_inf ||f Phi_yu||_1 + f Phi_yy y0 for every row f of Fy (and the u analogue).
SafetyLhs worst_case_lhs(const ClosedLoopMaps& maps, const StackedConstraints& cons, const NoiseSpec& noise,
                         const Vector& y0);

/// eps^2 (2 + gamma Y)^2 + 2 eps Y (2 + gamma Y).
double h_value(double eps, double gamma, double norm2_Y);

/// The six tightening terms, one entry per stacked row.
struct TighteningTerms {
  Vector t1, t2, t3;  ///< y side
  Vector t4, t5, t6;  ///< u side

  SafetyLhs totals() const;
};

/// Constraint tightening with parameter tau; requires tau * eps_inf < 1.
TighteningTerms tightened_terms_f(const ClosedLoopMaps& maps_hat, const StackedConstraints& cons, double tau,
                                  double eps_inf, const Matrix& G_hat, const Vector& y0_hat, const NoiseSpec& noise);
SafetyLhs tightened_lhs_f(const ClosedLoopMaps& maps_hat, const StackedConstraints& cons, double tau,
                          double eps_inf, const Matrix& G_hat, const Vector& y0_hat, const NoiseSpec& noise);

/// Oracle tightening with zeta = eps_inf ||Phi*_uy||_inf; requires zeta < 1/2.
TighteningTerms oracle_terms_phi(const ClosedLoopMaps& maps, const StackedConstraints& cons, double zeta,
                                 double eps_inf, const Matrix& G_hat, const Vector& y0_hat, const NoiseSpec& noise);
SafetyLhs oracle_lhs_phi(const ClosedLoopMaps& maps, const StackedConstraints& cons, double zeta, double eps_inf,
                         const Matrix& G_hat, const Vector& y0_hat, const NoiseSpec& noise);

/**
 * @brief Every safety row has the form a1 ||f P1||_1 + a2 ||f P2||_1 + f P1 y0 <= b.
 *
 * (P1, P2) is (Phi_yy, Phi_yu) for output rows and (Phi_uy, Phi_uu) for input rows.
 */
struct RowCoefficients {
  double a1 = 0.0;
  double a2 = 0.0;
};

RowCoefficients nominal_coefficients(const NoiseSpec& noise);
RowCoefficients tightened_coefficients(double tau, double eps_inf, double G_hat_inf, double y0_hat_inf,
                                       const NoiseSpec& noise);
RowCoefficients oracle_coefficients(double zeta, double eps_inf, double G_hat_inf, double y0_hat_inf,
                                    const NoiseSpec& noise);

}  // namespace safebiop

#endif  // SAFEBIOP_IOP_HPP
