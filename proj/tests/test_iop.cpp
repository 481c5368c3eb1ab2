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


#include <doctest.h>

#include <Eigen/Dense>

#include "safebiop/iop.hpp"
#include "safebiop/random.hpp"

using namespace safebiop;

namespace {

Matrix random_causal(Rng& rng, int rb, int cb, int N, bool strict, double scale = 1.0) {
  Matrix M = Matrix::Zero(static_cast<Eigen::Index>(rb) * N, static_cast<Eigen::Index>(cb) * N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (strict && i == j) continue;
      M.block(i * rb, j * cb, rb, cb) = scale * Eigen::Map<const Matrix>(gaussian_vector(rng, rb * cb).data(), rb, cb);
    }
  }
  return M;
}

Matrix random_column(Rng& rng, int p, int m, int N) {
  Matrix c = Eigen::Map<const Matrix>(gaussian_vector(rng, static_cast<Eigen::Index>(p) * m * N, 0.5).data(),
                                      static_cast<Eigen::Index>(p) * N, m);
  c.topRows(p).setZero();
  return c;
}

}  // namespace

TEST_CASE("norms") {
  Matrix M(2, 2);
  M << 1, -2, 3, 0.5;
  CHECK(inf_norm(M) == 3.5);
  CHECK(spectral_norm(Matrix::Identity(3, 3) * 2.0) == doctest::Approx(2.0));
  CHECK(spectral_norm(M) == doctest::Approx(Eigen::JacobiSVD<Matrix>(M).singularValues()(0)));
}

TEST_CASE("Toeplitz expansion") {
  Matrix col(6, 1);
  col << 0, 1, 2, 3, 4, 5;
  const Matrix T = toeplitz_expand(ToeplitzOperator(col, 2));
  REQUIRE(T.rows() == 6);
  REQUIRE(T.cols() == 3);
  CHECK(T(2, 0) == 2);
  CHECK(T(3, 0) == 3);
  CHECK(T(4, 1) == 2);
  CHECK(T(0, 1) == 0);
  CHECK(T(5, 2) == 1);
}

TEST_CASE("controller to responses and back") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 + trial % 2, m = 1 + (trial / 2) % 2, N = 2 + trial % 4;
    const Matrix col = random_column(rng, p, m, N);
    const ToeplitzOperator Gop(col, p);
    const Matrix G = Gop.expand();
    const Matrix K = random_causal(rng, m, p, N, false, 0.5);
    const ClosedLoopMaps maps = responses_from_controller(K, Gop);
    const Matrix Ip = Matrix::Identity(p * N, p * N), Im = Matrix::Identity(m * N, m * N);
    // Explicit inverses.
    const Matrix yy = (Ip - G * K).inverse();
    CHECK((maps.yy - yy).norm() < 1e-9);
    CHECK((maps.yu - yy * G).norm() < 1e-9);
    CHECK((maps.uy - K * yy).norm() < 1e-9);
    CHECK((maps.uu - (Im - K * G).inverse()).norm() < 1e-9);
    const AchievabilityResidual r = achievability_residual(maps, G);
    CHECK(r.r1 < 1e-10);
    CHECK(r.r2 < 1e-10);
    CHECK((controller_from_responses(maps) - K).norm() < 1e-8);
  }
}

TEST_CASE("maps completed from Phi_uy are achievable") {
  Rng rng(3);
  const int p = 2, m = 1, N = 4;
  const Matrix G = ToeplitzOperator(random_column(rng, p, m, N), p).expand();
  const Matrix Phi = random_causal(rng, m, p, N, false);
  const ClosedLoopMaps maps = maps_from_phi_uy(Phi, G);
  const AchievabilityResidual r = achievability_residual(maps, G);
  CHECK(r.r1 < 1e-12);
  CHECK(r.r2 < 1e-12);
  const ClosedLoopMaps again = responses_from_controller(controller_from_responses(maps), ToeplitzOperator(
      Matrix(G.leftCols(m)), p));
  CHECK((again.uy - Phi).norm() < 1e-9);
}

TEST_CASE("weighted cost equals the Frobenius norm of the stacked block matrix") {
  Rng rng(8);
  const int p = 1, m = 1, N = 4;
  const Matrix G = ToeplitzOperator(random_column(rng, p, m, N), p).expand();
  const ClosedLoopMaps maps = maps_from_phi_uy(random_causal(rng, m, p, N, false), G);
  const Vector y0 = gaussian_vector(rng, N);
  CostWeights w = CostWeights::identity(p, m, N);
  w.Q_blocks[N - 1] *= 20.0;
  for (auto& R : w.R_blocks) R *= 0.05;
  const Matrix Qh = w.Q_sqrt(), Rh = w.R_sqrt();
  Matrix big(2 * N, 2 * N + 1);
  big << Qh * maps.yy, Qh * maps.yu, Qh * maps.yy * y0, Rh * maps.uy, Rh * maps.uu, Rh * maps.uy * y0;
  CHECK(cost_j(maps, y0, w) == doctest::Approx(big.norm()).epsilon(1e-12));
  CHECK(inner_cost(maps, y0, 0.0, 0.0, w) == doctest::Approx(big.norm()).epsilon(1e-12));
  // Inflation multiplies the yy and uy blocks only.
  const double hG = 0.3, hy = 0.2;
  const double expected = std::sqrt((1 + hG + hy) * (Qh * maps.yy).squaredNorm() + (Qh * maps.yu).squaredNorm() +
                                    (Qh * maps.yy * y0).squaredNorm() + (1 + hy) * (Rh * maps.uy).squaredNorm() +
                                    (Rh * maps.uu).squaredNorm() + (Rh * maps.uy * y0).squaredNorm());
  CHECK(inner_cost(maps, y0, hG, hy, w) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("weights validation") {
  CostWeights w = CostWeights::identity(1, 1, 3);
  CHECK(w.is_identity());
  CHECK_NOTHROW(w.validate(1, 1, 3));
  CHECK_THROWS(w.validate(1, 1, 4));
  w.R_blocks[0](0, 0) = -1.0;
  CHECK_THROWS_AS(w.validate(1, 1, 3), std::invalid_argument);
}

TEST_CASE("worst-case row values match vertex enumeration") {
  Rng rng(21);
  const int N = 3;
  const Matrix G = ToeplitzOperator(random_column(rng, 1, 1, N), 1).expand();
  const ClosedLoopMaps maps = maps_from_phi_uy(random_causal(rng, 1, 1, N, false), G);
  const Vector y0 = gaussian_vector(rng, N);
  const NoiseSpec noise{0.7, 0.4};
  SafetyPolytope poly = SafetyPolytope::box(1, 1, 1.0, 1.0);
  const StackedConstraints cons = stack_polytope(poly, 1, 1, N);
  const SafetyLhs lhs = worst_case_lhs(maps, cons, noise, y0);
  Vector best_y = Vector::Constant(cons.Fy.rows(), -1e300), best_u = Vector::Constant(cons.Fu.rows(), -1e300);
  for (int mask = 0; mask < (1 << (2 * N)); ++mask) {
    Vector v(N), w(N);
    for (int i = 0; i < N; ++i) {
      v(i) = (mask >> i & 1) ? noise.v_inf : -noise.v_inf;
      w(i) = (mask >> (N + i) & 1) ? noise.w_inf : -noise.w_inf;
    }
    const Vector y = maps.yy * (v + y0) + maps.yu * w;
    const Vector u = maps.uy * (v + y0) + maps.uu * w;
    best_y = best_y.cwiseMax(cons.Fy * y);
    best_u = best_u.cwiseMax(cons.Fu * u);
  }
  CHECK((lhs.y - best_y).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((lhs.u - best_u).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("h function") {
  CHECK(h_value(0.1, 2.0, 3.0) == doctest::Approx(0.01 * 64 + 2 * 0.1 * 3 * 8));
  CHECK(h_value(0.0, 5.0, 5.0) == 0.0);
  CHECK_THROWS_AS(h_value(-1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("row coefficients") {
  const NoiseSpec noise{2.0, 3.0};  // w_inf, v_inf
  const RowCoefficients nom = nominal_coefficients(noise);
  CHECK(nom.a1 == 3.0);
  CHECK(nom.a2 == 2.0);
  const double tau = 4.0, e = 0.05, Gi = 0.7, yi = 6.0;
  const RowCoefficients t = tightened_coefficients(tau, e, Gi, yi, noise);
  const double den = 1 - e * tau;
  CHECK(t.a1 == doctest::Approx((3.0 + 2.0 * e * (1 + tau * Gi) + e * (1 + tau * yi)) / den));
  CHECK(t.a2 == 2.0);
  CHECK_THROWS_AS(tightened_coefficients(25.0, 0.05, Gi, yi, noise), std::invalid_argument);
  const double zeta = 0.2;
  const RowCoefficients o = oracle_coefficients(zeta, e, Gi, yi, noise);
  CHECK(o.a1 == doctest::Approx(3.0 / (1 - 2 * zeta) + (2 * 2.0 * (e + zeta * Gi) + 2 * (e + zeta * yi)) / (1 - 2 * zeta)));
  CHECK_THROWS_AS(oracle_coefficients(0.5, e, Gi, yi, noise), std::invalid_argument);
}

TEST_CASE("tightened and oracle row values agree with their coefficient form") {
  Rng rng(5);
  const int N = 5;
  const Matrix G = ToeplitzOperator(random_column(rng, 1, 1, N), 1).expand();
  const ClosedLoopMaps maps = maps_from_phi_uy(random_causal(rng, 1, 1, N, false), G);
  const Vector y0 = gaussian_vector(rng, N, 3.0);
  const NoiseSpec noise{1.0, 0.5};
  const StackedConstraints cons = stack_polytope(SafetyPolytope::box(1, 1, 1.0, 1.0), 1, 1, N);
  const double tau = 3.0, e = 0.02;
  const RowCoefficients c = tightened_coefficients(tau, e, inf_norm(G), y0.cwiseAbs().maxCoeff(), noise);
  const SafetyLhs f = tightened_lhs_f(maps, cons, tau, e, G, y0, noise);
  const Matrix FP1 = cons.Fy * maps.yy, FP2 = cons.Fy * maps.yu;
  const Vector expect = c.a1 * FP1.cwiseAbs().rowwise().sum() + c.a2 * FP2.cwiseAbs().rowwise().sum() + FP1 * y0;
  CHECK((f.y - expect).cwiseAbs().maxCoeff() < 1e-10);
  // The tightened value dominates the nominal one.
  CHECK(((f.y - worst_case_lhs(maps, cons, noise, y0).y).array() >= 0.0).all());
  const RowCoefficients oc = oracle_coefficients(0.1, e, inf_norm(G), y0.cwiseAbs().maxCoeff(), noise);
  const SafetyLhs o = oracle_lhs_phi(maps, cons, 0.1, e, G, y0, noise);
  const Matrix FU1 = cons.Fu * maps.uy, FU2 = cons.Fu * maps.uu;
  const Vector expect_u = oc.a1 * FU1.cwiseAbs().rowwise().sum() + oc.a2 * FU2.cwiseAbs().rowwise().sum() + FU1 * y0;
  CHECK((o.u - expect_u).cwiseAbs().maxCoeff() < 1e-10);
}
