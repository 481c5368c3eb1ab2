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


#include <benchmark/benchmark.h>

#include "safebiop/behavior.hpp"
#include "safebiop/iop.hpp"
#include "safebiop/plant.hpp"
#include "safebiop/random.hpp"
#include "safebiop/synthesis.hpp"

using namespace safebiop;

namespace {

SafetyPolytope box_polytope(int N) {
  SafetyPolytope poly = SafetyPolytope::box(1, 1, 5.5, 100.0);
  for (int t = 1; t < N; ++t) poly.y_steps.push_back(t);
  for (int t = 0; t < N - 1; ++t) poly.u_steps.push_back(t);
  return poly;
}

void BM_NominalSynthesis(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const StateSpaceModel model = benchmark_model(1.0, (Vector(2) << 6, 0).finished());
  const Matrix g = true_impulse_response(model, N);
  const Vector y0 = true_free_response(model, N);
  const SafetyPolytope poly = box_polytope(N);
  const CostWeights w = CostWeights::identity(1, 1, N);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_nominal(g, y0, poly, NoiseSpec{1.0, 1.0}, w));
  }
}
BENCHMARK(BM_NominalSynthesis)->Arg(6)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_RobustInner(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const StateSpaceModel model = benchmark_model(1.0, (Vector(2) << 6, 0).finished());
  EstimateBundle b;
  b.g_column = true_impulse_response(model, N);
  b.y0_hat = true_free_response(model, N);
  b.eps2 = b.eps_inf = 0.01;
  b.errors_set = true;
  const SafetyPolytope poly = box_polytope(N);
  const CostWeights w = CostWeights::identity(1, 1, N);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_robust_inner(b, poly, NoiseSpec{1.0, 1.0}, w, HyperParams{50.0, 11.0, 50.0}));
  }
}
BENCHMARK(BM_RobustInner)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_EstimateLs(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0)), T_ini = 4, N = 12;
  const StateSpaceModel model = benchmark_model(0.9, Vector::Zero(2));
  Rng rng(1);
  DataRecord rec;
  rec.T_ini = T_ini;
  rec.N = N;
  rec.historical_u = SignalTrajectory(gaussian_vector(rng, T), 1);
  rec.historical_y = simulate_open_loop(model, rec.historical_u, Vector::Zero(T), Vector::Zero(T)).outputs;
  rec.recent_u = SignalTrajectory(gaussian_vector(rng, T_ini), 1);
  rec.recent_y = simulate_open_loop(model, rec.recent_u, Vector::Zero(T_ini), Vector::Zero(T_ini)).outputs;
  const HankelPartition part = partition_data(rec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_ls(part, rec));
  }
}
BENCHMARK(BM_EstimateLs)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_ResponsesFromController(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  Rng rng(2);
  Matrix col = gaussian_vector(rng, N);
  col(0, 0) = 0.0;
  const ToeplitzOperator G(col, 1);
  const Matrix K = Matrix(Eigen::Map<Matrix>(gaussian_vector(rng, N * N, 0.3).data(), N, N).triangularView<Eigen::Lower>());
  for (auto _ : state) {
    benchmark::DoNotOptimize(responses_from_controller(K, G));
  }
}
BENCHMARK(BM_ResponsesFromController)->Arg(12)->Arg(48)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
