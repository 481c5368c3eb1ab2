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

#include "safebiop/random.hpp"
#include "safebiop/types.hpp"

using namespace safebiop;

TEST_CASE("signal trajectory indexing") {
  SignalTrajectory s(Vector::LinSpaced(6, 0, 5), 2);
  CHECK(s.length() == 3);
  CHECK(s.at(1)(0) == 2.0);
  CHECK(s.at(1)(1) == 3.0);
  s.set(2, Vector::Constant(2, -1.0));
  CHECK(s.values(5) == -1.0);
  CHECK_THROWS_AS(s.at(3), std::out_of_range);
  CHECK_THROWS_AS(SignalTrajectory(Vector::Zero(5), 2), DimensionError);
}

TEST_CASE("require_dim names the mismatch") {
  try {
    require_dim("F_y columns", 2, 3);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()) == "F_y columns: expected 2, got 3");
  }
}

TEST_CASE("benchmark model matrices") {
  const StateSpaceModel s = benchmark_model(0.9, Vector::Zero(2));
  CHECK(s.A(0, 0) == doctest::Approx(0.9));
  CHECK(s.A(0, 1) == doctest::Approx(0.225));
  CHECK(s.A(1, 0) == 0.0);
  CHECK(s.B(1, 0) == doctest::Approx(0.1));
  CHECK(s.C(0, 1) == -1.0);
  CHECK(s.n() == 2);
  CHECK(s.m() == 1);
  CHECK(s.p() == 1);
}

TEST_CASE("model validation") {
  StateSpaceModel s = benchmark_model(1.0, Vector::Zero(2));
  CHECK_NOTHROW(s.validate());
  s.B = Matrix::Zero(3, 1);
  CHECK_THROWS_AS(s.validate(), DimensionError);
  s = benchmark_model(1.0, Vector::Zero(2));
  s.A(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("stacked polytope places rows at the listed steps") {
  SafetyPolytope poly = SafetyPolytope::box(1, 1, 5.0, 2.0);
  poly.y_steps = {1, 3};
  poly.u_steps = {};
  const StackedConstraints c = stack_polytope(poly, 1, 1, 4);
  REQUIRE(c.Fy.rows() == 4);
  CHECK(c.Fy(0, 1) == 1.0);
  CHECK(c.Fy(1, 1) == -1.0);
  CHECK(c.Fy(2, 3) == 1.0);
  CHECK(c.Fy.row(0).sum() == 1.0);
  CHECK(c.by.isConstant(5.0));
  CHECK(c.Fu.rows() == 8);  // empty list means every step
  poly.y_steps = {4};
  CHECK_THROWS_AS(stack_polytope(poly, 1, 1, 4), std::invalid_argument);
}

TEST_CASE("derive_seed is deterministic and spreads indices") {
  CHECK(derive_seed(7, 0) == derive_seed(7, 0));
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  CHECK(derive_seed(7, 0) != derive_seed(8, 0));
}

TEST_CASE("noise sampler respects its bounds") {
  NoiseSpec spec{0.5, 2.0};
  NoiseSampler uni(spec, 1);
  CHECK(uni.input_noise(1000).cwiseAbs().maxCoeff() <= 0.5);
  CHECK(uni.output_noise(1000).cwiseAbs().maxCoeff() <= 2.0);
  spec.distribution = NoiseDistribution::TruncatedGaussian;
  spec.sigma = 3.0;
  NoiseSampler tg(spec, 1);
  const Vector w = tg.input_noise(1000);
  CHECK(w.cwiseAbs().maxCoeff() <= 0.5);
  CHECK(w.cwiseAbs().maxCoeff() > 0.4);
  NoiseSpec zero{0.0, 0.0};
  CHECK(NoiseSampler(zero, 1).input_noise(4).isZero());
  CHECK_THROWS_AS(NoiseSpec({-1.0, 0.0}).validate(), std::invalid_argument);
}
