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

#include <filesystem>

#include "safebiop/behavior.hpp"
#include "safebiop/iop.hpp"
#include "safebiop/plant.hpp"
#include "safebiop/random.hpp"

using namespace safebiop;

namespace {

struct Scenario {
  DataRecord record;
  Matrix g_true;
  Vector y0_true;
};

/// Noiseless data on the benchmark plant; the recent window ends at x_end.
Scenario noiseless_scenario(double rho, int T, int T_ini, int N, std::uint64_t seed) {
  const StateSpaceModel s = benchmark_model(rho, Vector::Zero(2));
  Rng rng(seed);
  Scenario sc;
  sc.record.historical_u = SignalTrajectory(gaussian_vector(rng, T), 1);
  sc.record.historical_y = simulate_open_loop(s, sc.record.historical_u, Vector::Zero(T), Vector::Zero(T)).outputs;
  StateSpaceModel r = s;
  r.x0 = gaussian_vector(rng, 2, 2.0);
  sc.record.recent_u = SignalTrajectory(gaussian_vector(rng, T_ini), 1);
  sc.record.recent_y = simulate_open_loop(r, sc.record.recent_u, Vector::Zero(T_ini), Vector::Zero(T_ini)).outputs;
  Vector x = r.x0;
  for (int t = 0; t < T_ini; ++t) x = s.A * x + s.B * sc.record.recent_u.at(t);
  sc.record.T_ini = T_ini;
  sc.record.N = N;
  StateSpaceModel now = s;
  now.x0 = x;
  sc.g_true = true_impulse_response(s, N);
  sc.y0_true = true_free_response(now, N);
  return sc;
}

}  // namespace

TEST_CASE("block Hankel layout") {
  const SignalTrajectory s((Vector(8) << 1, 2, 3, 4, 5, 6, 7, 8).finished(), 2);
  const Matrix H = build_hankel(s, 2);
  REQUIRE(H.rows() == 4);
  REQUIRE(H.cols() == 3);
  CHECK(H(0, 0) == 1);
  CHECK(H(2, 0) == 3);
  CHECK(H(0, 2) == 5);
  CHECK(H(3, 2) == 8);
  CHECK_THROWS_AS(build_hankel(s, 5), std::invalid_argument);
}

TEST_CASE("persistency of excitation") {
  Rng rng(1);
  const SignalTrajectory u(gaussian_vector(rng, 40), 1);
  CHECK(check_pe(u, 10).is_pe);
  CHECK(check_pe(u, 10).rank == 10);
  const SignalTrajectory c(Vector::Ones(40), 1);
  const PEReport r = check_pe(c, 3);
  CHECK_FALSE(r.is_pe);
  CHECK(r.rank == 1);
}

TEST_CASE("pseudo-inverse satisfies the Moore-Penrose conditions") {
  Rng rng(4);
  Matrix M = Matrix::Zero(5, 4);
  M.leftCols(3) = Eigen::Map<const Matrix>(gaussian_vector(rng, 15).data(), 5, 3);
  M.col(3) = M.col(0) + M.col(1);  // rank 3
  const Matrix P = pseudo_inverse(M);
  CHECK((M * P * M - M).norm() < 1e-10);
  CHECK((P * M * P - P).norm() < 1e-10);
  CHECK(((M * P).transpose() - M * P).norm() < 1e-10);
  CHECK(((P * M).transpose() - P * M).norm() < 1e-10);
}

TEST_CASE("length prerequisite") {
  const Scenario sc = noiseless_scenario(1.0, 60, 4, 12, 2);
  CHECK(sc.record.satisfies_length_prerequisite(2));  // 2 * (2 + 4 + 12) - 1 = 35
  DataRecord short_rec = sc.record;
  short_rec.N = 60;
  CHECK_FALSE(short_rec.satisfies_length_prerequisite(2));
  CHECK_THROWS_AS(partition_data(short_rec), std::invalid_argument);
}

TEST_CASE("noiseless least squares recovers the impulse and free responses") {
  for (double rho : {0.9, 1.0}) {
    const Scenario sc = noiseless_scenario(rho, 100, 4, 12, 7);
    const EstimateBundle b = estimate_ls(partition_data(sc.record), sc.record);
    CHECK((b.g_column - sc.g_true).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((b.y0_hat - sc.y0_true).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(b.N() == 12);
    CHECK(b.g_column.topRows(1).isZero());
  }
}

TEST_CASE("noiseless maximum likelihood agrees with the truth") {
  const Scenario sc = noiseless_scenario(0.9, 100, 4, 12, 8);
  const EstimateBundle b = estimate_ml(partition_data(sc.record), sc.record, 1e-4);
  CHECK((b.g_column - sc.g_true).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((b.y0_hat - sc.y0_true).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("oracle error assessment uses Toeplitz norms") {
  const Scenario sc = noiseless_scenario(0.9, 100, 4, 4, 9);
  EstimateBundle b;
  b.p = 1;
  b.g_column = sc.g_true;
  b.g_column(1, 0) += 0.1;  // every subdiagonal entry of the Toeplitz matrix shifts
  b.y0_hat = sc.y0_true;
  b.y0_hat(2) -= 0.3;
  const EstimateBundle e = assess_errors(b, OracleErrors{sc.g_true, sc.y0_true});
  // 0.1 * shift matrix: 2-norm and inf-norm are both 0.1.
  CHECK(*e.eps2_G == doctest::Approx(0.1));
  CHECK(*e.eps_inf_G == doctest::Approx(0.1));
  CHECK(*e.eps2_y == doctest::Approx(0.3));
  CHECK(e.eps2 == doctest::Approx(0.3));
  CHECK(e.eps_inf == doctest::Approx(0.3));
  CHECK(e.errors_set);
}

TEST_CASE("bootstrap error assessment is reproducible") {
  const Scenario sc = noiseless_scenario(0.9, 100, 4, 6, 10);
  const EstimateBundle b = estimate_ls(partition_data(sc.record), sc.record);
  BootstrapErrors bs;
  bs.record = &sc.record;
  bs.sigma = 0.05;
  bs.resamples = 20;
  bs.seed = 3;
  const EstimateBundle e1 = assess_errors(b, bs), e2 = assess_errors(b, bs);
  CHECK(e1.eps2 == e2.eps2);
  CHECK(e1.eps2 > 0.0);
  CHECK(e1.eps_inf >= *e1.eps_inf_G);
}

TEST_CASE("percentile interpolates linearly") {
  CHECK(percentile({4, 1, 3, 2}, 50) == doctest::Approx(2.5));
  CHECK(percentile({1, 2, 3, 4}, 90) == doctest::Approx(3.7));
  CHECK(percentile({5}, 90) == 5.0);
  CHECK_THROWS_AS(percentile({}, 50), std::invalid_argument);
}

TEST_CASE("data records round-trip through CSV") {
  const Scenario sc = noiseless_scenario(1.0, 40, 3, 5, 11);
  const auto dir = std::filesystem::temp_directory_path() / "safebiop_record_test";
  std::filesystem::remove_all(dir);
  save_record(dir.string(), sc.record);
  const DataRecord back = load_record(dir.string(), 3, 5);
  CHECK((back.historical_u.values - sc.record.historical_u.values).norm() == 0.0);
  CHECK((back.recent_y.values - sc.record.recent_y.values).norm() == 0.0);
  std::filesystem::remove_all(dir);
}
