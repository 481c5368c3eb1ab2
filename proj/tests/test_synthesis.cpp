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

#include <cmath>

#include "safebiop/plant.hpp"
#include "safebiop/random.hpp"
#include "safebiop/synthesis.hpp"

using namespace safebiop;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Unconstrained optimum by dense least squares over the causal entries of Phi_uy (SISO).
double least_squares_optimum(const Matrix& G, const Vector& y0, const CostWeights& w) {
  const int N = static_cast<int>(G.rows());
  auto stacked = [&](const Matrix& Phi) {
    const ClosedLoopMaps maps = maps_from_phi_uy(Phi, G);
    const Matrix Qh = w.Q_sqrt(), Rh = w.R_sqrt();
    Matrix big(2 * N, 2 * N + 1);
    big << Qh * maps.yy, Qh * maps.yu, Qh * maps.yy * y0, Rh * maps.uy, Rh * maps.uu, Rh * maps.uy * y0;
    return Vector(Eigen::Map<const Vector>(big.data(), big.size()));
  };
  const Vector c = stacked(Matrix::Zero(N, N));
  Matrix A(c.size(), N * (N + 1) / 2);
  int k = 0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j <= i; ++j) {
      Matrix E = Matrix::Zero(N, N);
      E(i, j) = 1.0;
      A.col(k++) = stacked(E) - c;
    }
  }
  const Vector x = A.colPivHouseholderQr().solve(-c);
  return (A * x + c).norm();
}

struct Benchmark {
  Matrix g_column;
  Vector y0;
  Matrix G;
};

Benchmark benchmark(double rho, const Vector& x0, int N) {
  const StateSpaceModel s = benchmark_model(rho, x0);
  Benchmark b{true_impulse_response(s, N), true_free_response(s, N), Matrix()};
  b.G = ToeplitzOperator(b.g_column, 1).expand();
  return b;
}

SafetyPolytope fig1a_polytope() {
  SafetyPolytope poly = SafetyPolytope::box(1, 1, 5.5, 100.0);
  for (int t = 1; t <= 11; ++t) poly.y_steps.push_back(t);
  for (int t = 0; t <= 10; ++t) poly.u_steps.push_back(t);
  return poly;
}

EstimateBundle exact_bundle(const Benchmark& b, double eps2, double eps_inf) {
  EstimateBundle e;
  e.g_column = b.g_column;
  e.y0_hat = b.y0;
  e.p = 1;
  e.eps2 = eps2;
  e.eps_inf = eps_inf;
  e.errors_set = true;
  return e;
}

}  // namespace

TEST_CASE("unconstrained nominal synthesis matches the least-squares optimum") {
  const int N = 6;
  const Benchmark b = benchmark(0.9, (Vector(2) << 6, 0).finished(), N);
  CostWeights w = CostWeights::identity(1, 1, N);
  w.Q_blocks[N - 1] *= 20.0;
  for (auto& R : w.R_blocks) R *= 0.05;
  const SynthesisResult r = solve_nominal(b.g_column, b.y0, SafetyPolytope::empty(1, 1), NoiseSpec{1, 1}, w);
  REQUIRE(r.status == SynthesisStatus::Optimal);
  CHECK(r.j_inner == doctest::Approx(least_squares_optimum(b.G, b.y0, w)).epsilon(1e-6));
  CHECK(cost_j(r.maps_hat, b.y0, w) == doctest::Approx(r.j_inner).epsilon(1e-7));
  const AchievabilityResidual res = achievability_residual(r.maps_hat, b.G);
  CHECK(res.r1 < 1e-9);
  CHECK_NOTHROW(require_causal(r.controller, 1, 1, N));
}

TEST_CASE("constrained nominal synthesis on the double integrator") {
  const int N = 12;
  const Benchmark b = benchmark(1.0, (Vector(2) << 6, 0).finished(), N);
  const SafetyPolytope poly = fig1a_polytope();
  const NoiseSpec noise{1.0, 1.0};
  const CostWeights w = CostWeights::identity(1, 1, N);
  const SynthesisResult r = solve_nominal(b.g_column, b.y0, poly, noise, w);
  REQUIRE(r.status == SynthesisStatus::Optimal);
  // Reference optimum for this setup: 69.88.
  CHECK(r.j_inner == doctest::Approx(69.88).epsilon(0.02));
  const StackedConstraints cons = stack_polytope(poly, 1, 1, N);
  const SafetyLhs lhs = worst_case_lhs(r.maps_hat, cons, noise, b.y0);
  CHECK((lhs.y - cons.by).maxCoeff() <= 1e-6);
  CHECK((lhs.u - cons.bu).maxCoeff() <= 1e-6);
  // The unconstrained optimum is cheaper.
  const SynthesisResult free = solve_nominal(b.g_column, b.y0, SafetyPolytope::empty(1, 1), noise, w);
  CHECK(free.j_inner < r.j_inner);
}

TEST_CASE("impossible bounds are reported as infeasible") {
  const int N = 6;
  const Benchmark b = benchmark(1.0, (Vector(2) << 6, 0).finished(), N);
  SafetyPolytope poly = SafetyPolytope::box(1, 1, 0.5, 100.0);  // below the output noise bound
  const SynthesisResult r = solve_nominal(b.g_column, b.y0, poly, NoiseSpec{1.0, 1.0}, CostWeights::identity(1, 1, N));
  CHECK(r.status == SynthesisStatus::Infeasible);
}

TEST_CASE("robust inner program without errors reduces to the nominal one") {
  const int N = 8;
  const Benchmark b = benchmark(1.0, (Vector(2) << 6, 0).finished(), N);
  SafetyPolytope poly = SafetyPolytope::box(1, 1, 6.5, 100.0);
  for (int t = 1; t < N; ++t) poly.y_steps.push_back(t);
  const NoiseSpec noise{1.0, 1.0};
  const CostWeights w = CostWeights::identity(1, 1, N);
  const SynthesisResult nom = solve_nominal(b.g_column, b.y0, poly, noise, w);
  const SynthesisResult rob = solve_robust_inner(exact_bundle(b, 0, 0), poly, noise, w, HyperParams{kInf, kInf, kInf});
  REQUIRE(nom.status == SynthesisStatus::Optimal);
  REQUIRE(rob.status == SynthesisStatus::Optimal);
  CHECK(rob.j_robust == doctest::Approx(nom.j_inner).epsilon(1e-6));
}

TEST_CASE("robust inner program respects its caps") {
  const int N = 6;
  const Benchmark b = benchmark(0.9, (Vector(2) << 6, 0).finished(), N);
  SafetyPolytope poly = SafetyPolytope::box(1, 1, 10.0, 100.0);
  const NoiseSpec noise{1.0, 1.0};
  const CostWeights w = CostWeights::identity(1, 1, N);
  const EstimateBundle e = exact_bundle(b, 0.01, 0.01);
  const HyperParams h{0.8, 1.5, 2.0};
  const SynthesisResult r = solve_robust_inner(e, poly, noise, w, h);
  REQUIRE(r.status == SynthesisStatus::Optimal);
  CHECK(spectral_norm(r.maps_hat.uy) <= 0.8 + 1e-6);
  CHECK(inf_norm(r.maps_hat.uy) <= 1.5 + 1e-6);
  CHECK(r.j_robust == doctest::Approx(r.j_inner / (1 - 0.01 * 0.8)).epsilon(1e-12));
  const double hG = h_value(0.01, 2.0, spectral_norm(b.G)), hy = h_value(0.01, 2.0, b.y0.norm());
  CHECK(r.j_inner == doctest::Approx(inner_cost(r.maps_hat, b.y0, hG, hy, w)).epsilon(1e-6));
  // Tightened rows hold at the solution.
  const StackedConstraints cons = stack_polytope(poly, 1, 1, N);
  const SafetyLhs f = tightened_lhs_f(r.maps_hat, cons, 1.5, 0.01, b.G, b.y0, noise);
  CHECK((f.y - cons.by).maxCoeff() <= 1e-6);
  CHECK((f.u - cons.bu).maxCoeff() <= 1e-6);
}

TEST_CASE("robust inner program rejects invalid hyper-parameters") {
  const int N = 4;
  const Benchmark b = benchmark(0.9, (Vector(2) << 1, 0).finished(), N);
  const SafetyPolytope poly = SafetyPolytope::box(1, 1, 10.0, 100.0);
  const CostWeights w = CostWeights::identity(1, 1, N);
  const EstimateBundle e = exact_bundle(b, 0.1, 0.1);
  CHECK_THROWS_AS(solve_robust_inner(e, poly, NoiseSpec{1, 1}, w, HyperParams{2.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_robust_inner(e, poly, NoiseSpec{1, 1}, w, HyperParams{1.0, 1.0, 10.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_robust_inner(e, poly, NoiseSpec{1, 1}, w, HyperParams{1.0, 10.0, 5.0}), std::invalid_argument);
  CostWeights bad = w;
  bad.R_blocks[1] *= 2.0;
  CHECK_THROWS_AS(solve_robust_inner(e, poly, NoiseSpec{1, 1}, bad, HyperParams{1.0, 1.0, 5.0}), std::invalid_argument);
  EstimateBundle unset = e;
  unset.errors_set = false;
  CHECK_THROWS_AS(solve_robust_inner(unset, poly, NoiseSpec{1, 1}, w, HyperParams{1.0, 1.0, 5.0}), std::invalid_argument);
}

TEST_CASE("golden-section search") {
  auto [x, f] = golden_section([](double v) { return (v - 2.0) * (v - 2.0) + 1.0; }, 0.0, 5.0, 60);
  CHECK(x == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(f == doctest::Approx(1.0));
  // Infeasible (infinite) on the left part of the interval.
  auto [x2, f2] = golden_section([](double v) { return v < 3.0 ? kInf : v; }, 0.0, 10.0, 60);
  CHECK(x2 == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(std::isfinite(f2));
}

TEST_CASE("hyper-parameter search is deterministic across thread counts") {
  const int N = 6;
  const Benchmark b = benchmark(0.9, (Vector(2) << 6, 0).finished(), N);
  const SafetyPolytope poly = SafetyPolytope::box(1, 1, 10.0, 100.0);
  const CostWeights w = CostWeights::identity(1, 1, N);
  const EstimateBundle e = exact_bundle(b, 0.02, 0.02);
  GridRandom grid;
  grid.n_points = 12;
  grid.seed = 5;
  SynthesisOptions one, four;
  four.threads = 4;
  const SynthesisResult a = search_hyperparams(e, poly, NoiseSpec{1, 1}, w, grid, one);
  const SynthesisResult c = search_hyperparams(e, poly, NoiseSpec{1, 1}, w, grid, four);
  REQUIRE(a.status == SynthesisStatus::Optimal);
  CHECK(a.hyper.gamma == c.hyper.gamma);
  CHECK(a.hyper.tau == c.hyper.tau);
  CHECK(a.j_robust == c.j_robust);
  CHECK(a.solves == 12);
  CHECK(a.hyper.alpha == a.hyper.gamma);
}

TEST_CASE("golden search over gamma beats the endpoints") {
  const int N = 6;
  const Benchmark b = benchmark(0.9, (Vector(2) << 6, 0).finished(), N);
  const CostWeights w = CostWeights::identity(1, 1, N);
  const EstimateBundle e = exact_bundle(b, 0.01, 0.01);
  GoldenGamma gold;
  gold.iterations = 20;
  gold.alpha = 10.0;
  const SynthesisResult r = search_hyperparams(e, SafetyPolytope::empty(1, 1), NoiseSpec{1, 1}, w, gold);
  REQUIRE(r.status == SynthesisStatus::Optimal);
  CHECK(r.hyper.gamma <= 10.0);
  CHECK(r.hyper.alpha == 10.0);
  CHECK(std::isinf(r.hyper.tau));
  for (double g : {0.0, 10.0}) {
    CHECK(r.j_robust <= robust_cost(e, SafetyPolytope::empty(1, 1), NoiseSpec{1, 1}, w, HyperParams{g, kInf, 10.0}) + 1e-9);
  }
}

TEST_CASE("oracle gap vanishes without infinity-norm error") {
  const int N = 12;
  const Benchmark b = benchmark(1.0, (Vector(2) << 1, 0).finished(), N);
  SafetyPolytope poly = SafetyPolytope::box(1, 1, 3.0, 100.0);
  poly.y_steps = {1, 2, 3, 4, 5, 6};
  for (int t = 0; t <= 10; ++t) poly.u_steps.push_back(t);
  const std::vector<SPoint> S = suboptimality_gap_S(OracleErrors{b.g_column, b.y0}, exact_bundle(b, 0, 0), poly,
                                                    NoiseSpec{1, 1}, CostWeights::identity(1, 1, N), {0.0, 0.5});
  REQUIRE(S.size() == 2);
  CHECK(S[0].feasible);
  CHECK(std::abs(S[0].S) < 1e-6);
  CHECK_FALSE(S[1].feasible);
  CHECK(std::isinf(S[1].S));
}

TEST_CASE("theoretical bound terms") {
  BoundInputs in;
  in.phi_star = PhiStarNorms{2.0, 3.0};
  in.eps2 = 0.01;
  in.eps_inf = 0.02;
  in.alpha = 5.0;
  in.G_hat_norm2 = 1.0;
  in.y0_hat_norm2 = 10.0;
  in.G_norm2 = 1.1;
  in.y0_norm2 = 9.0;
  in.phi_c_norm2 = 1.5;
  in.S_eps = 0.01;
  const BoundTerms t = theoretical_bound(in);
  const double M = h_value(0.01, 5.0, 1.0) + h_value(0.01, 5.0, 10.0) + h_value(0.01, 1.5, 1.1) + h_value(0.01, 1.5, 9.0);
  const double V = h_value(0.01, 5.0, 10.0) + h_value(0.01, 1.5, 9.0);
  CHECK(t.eta == doctest::Approx(0.02));
  CHECK(t.zeta == doctest::Approx(0.06));
  CHECK(t.M_c == doctest::Approx(M));
  CHECK(t.V_c == doctest::Approx(V));
  CHECK(t.bound_value == doctest::Approx(20 * 0.02 + 4 * (M + V) + 4 * 0.01 * (1 + M + V)));
  CHECK(t.certified);
  in.alpha = 11.0;  // above 5 ||Phi*||
  CHECK_FALSE(theoretical_bound(in).certified);
  in.alpha = 5.0;
  in.S_eps = kInf;
  CHECK(std::isinf(theoretical_bound(in).bound_value));
}

TEST_CASE("safe exploration inflates the input noise bound") {
  const int N = 6;
  const Benchmark b = benchmark(0.9, (Vector(2) << 2, 0).finished(), N);
  const SafetyPolytope poly = SafetyPolytope::box(1, 1, 8.0, 100.0);
  const CostWeights w = CostWeights::identity(1, 1, N);
  const ExplorationResult r = safe_exploration_policy(exact_bundle(b, 0, 0), 2.0, poly, NoiseSpec{1, 1}, w,
                                                      GridRandom{});
  REQUIRE(r.status == SynthesisStatus::Optimal);
  const StackedConstraints cons = stack_polytope(poly, 1, 1, N);
  const SafetyLhs lhs = worst_case_lhs(r.synthesis.maps_hat, cons, NoiseSpec{3.0, 1.0}, b.y0);
  CHECK((lhs.y - cons.by).maxCoeff() <= 1e-6);
  CHECK_THROWS_AS(safe_exploration_policy(exact_bundle(b, 0, 0), -1.0, poly, NoiseSpec{1, 1}, w, GridRandom{}),
                  std::invalid_argument);
}

TEST_CASE("results serialize infinities as strings") {
  SynthesisResult r;
  r.hyper = HyperParams{kInf, 1.0, kInf};
  r.controller = Matrix::Identity(2, 2);
  const nlohmann::json j = to_json(r);
  CHECK(j["hyper"]["gamma"] == "inf");
  CHECK(j["hyper"]["tau"] == 1.0);
  CHECK(j["controller"]["data"].size() == 4);
}
