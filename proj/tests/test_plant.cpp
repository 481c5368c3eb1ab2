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

#include <random>

#include "safebiop/plant.hpp"
#include "safebiop/random.hpp"

using namespace safebiop;

namespace {

StateSpaceModel mimo_model() {
  StateSpaceModel s;
  s.A = (Matrix(3, 3) << 0.5, 0.1, 0, 0, 0.8, 0.2, 0.1, 0, 0.3).finished();
  s.B = (Matrix(3, 2) << 1, 0, 0, 1, 1, 1).finished();
  s.C = (Matrix(2, 3) << 1, 0, 1, 0, 1, -1).finished();
  s.x0 = (Vector(3) << 1, -2, 0.5).finished();
  return s;
}

}  // namespace

TEST_CASE("open-loop simulation follows the recursion") {
  const StateSpaceModel s = mimo_model();
  Rng rng(5);
  const int T = 6;
  const SignalTrajectory u(gaussian_vector(rng, 2 * T), 2);
  const Vector w = gaussian_vector(rng, 2 * T), v = gaussian_vector(rng, 2 * T);
  const OpenLoopResult r = simulate_open_loop(s, u, w, v);
  Vector x = s.x0;
  for (int t = 0; t < T; ++t) {
    CHECK((r.states.at(t) - x).norm() < 1e-14);
    CHECK((r.outputs.at(t) - (s.C * x + v.segment(2 * t, 2))).norm() < 1e-14);
    x = s.A * x + s.B * (u.at(t) + w.segment(2 * t, 2));
  }
}

TEST_CASE("impulse and free responses") {
  const StateSpaceModel s = mimo_model();
  const int N = 5;
  const Matrix g = true_impulse_response(s, N);
  REQUIRE(g.rows() == 2 * N);
  REQUIRE(g.cols() == 2);
  CHECK(g.topRows(2).isZero());
  Matrix Ak = Matrix::Identity(3, 3);
  for (int k = 1; k < N; ++k) {
    CHECK((g.middleRows(2 * k, 2) - s.C * Ak * s.B).norm() < 1e-14);
    Ak = s.A * Ak;
  }
  // Free response equals a zero-input simulation.
  const OpenLoopResult r = simulate_open_loop(s, SignalTrajectory::zeros(2, N), Vector::Zero(2 * N), Vector::Zero(2 * N));
  CHECK((true_free_response(s, N) - r.outputs.values).norm() < 1e-13);
}

TEST_CASE("closed loop with zero gain equals open loop") {
  const StateSpaceModel s = benchmark_model(1.0, (Vector(2) << 6, 0).finished());
  const int N = 8;
  Rng rng(9);
  const Vector w = uniform_vector(rng, N, 1.0), v = uniform_vector(rng, N, 1.0);
  const ClosedLoopRollout cl = simulate_closed_loop(s, Matrix::Zero(N, N), w, v);
  const OpenLoopResult ol = simulate_open_loop(s, SignalTrajectory(w, 1), Vector::Zero(N), v);
  CHECK((cl.y.values - ol.outputs.values).norm() < 1e-13);
  CHECK((cl.u.values - w).norm() == 0.0);
}

TEST_CASE("closed loop matches the stacked linear map") {
  // y = (I - G K)^-1 (G w + v + y0) with G the Toeplitz matrix of the impulse response.
  const StateSpaceModel s = benchmark_model(0.95, (Vector(2) << 1, -1).finished());
  const int N = 7;
  Rng rng(2);
  Matrix K = Matrix::Zero(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= i; ++j) K(i, j) = 0.3 * gaussian_vector(rng, 1)(0);
  const Matrix g = true_impulse_response(s, N);
  Matrix G = Matrix::Zero(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= i; ++j) G(i, j) = g(i - j, 0);
  const Vector w = gaussian_vector(rng, N), v = gaussian_vector(rng, N);
  const ClosedLoopRollout cl = simulate_closed_loop(s, K, w, v);
  const Vector y = (Matrix::Identity(N, N) - G * K).lu().solve(G * w + v + true_free_response(s, N));
  CHECK((cl.y.values - y).norm() < 1e-10);
  CHECK((cl.u.values - (K * y + w)).norm() < 1e-10);
}

TEST_CASE("non-causal controllers are rejected") {
  Matrix K = Matrix::Zero(3, 3);
  K(0, 2) = 1.0;
  CHECK_THROWS_AS(require_causal(K, 1, 1, 3), std::invalid_argument);
  K(0, 2) = 0.0;
  K(2, 0) = 1.0;
  CHECK_NOTHROW(require_causal(K, 1, 1, 3));
}

TEST_CASE("rollouts are reproducible and stream-separated") {
  const StateSpaceModel s = benchmark_model(1.0, (Vector(2) << 6, 0).finished());
  NoiseSpec noise{1.0, 1.0};
  noise.seed = 42;
  const auto a = simulate_closed_loop(s, Matrix::Zero(5, 5), noise, 3);
  const auto b = simulate_closed_loop(s, Matrix::Zero(5, 5), noise, 3);
  REQUIRE(a.size() == 3);
  CHECK(a[2].y.values == b[2].y.values);
  CHECK(a[0].w != a[1].w);
  CHECK(a[0].w.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("safety check reports slack and the first violation") {
  SafetyPolytope poly = SafetyPolytope::box(1, 1, 2.0, 10.0);
  poly.y_steps = {1, 2};
  const SignalTrajectory y((Vector(4) << 100, 1.5, -2.5, 3).finished(), 1);
  const SignalTrajectory u(Vector::Zero(4), 1);
  const SafetyReport r = check_safety(y, u, poly);
  CHECK_FALSE(r.all_safe);
  CHECK(r.first_violation_step == 2);
  CHECK(r.min_slack == doctest::Approx(-0.5));
  CHECK(r.y_slack.size() == 4);
  CHECK(r.u_slack.size() == 8);
  poly.y_steps = {1};
  CHECK(check_safety(y, u, poly).all_safe);
}
