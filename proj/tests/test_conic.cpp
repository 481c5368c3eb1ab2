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
#include <random>

#include "safebiop/conic.hpp"

using namespace safebiop;
using namespace safebiop::conic;

namespace {

Vector scalar_vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("svec and smat are inverse and preserve the trace inner product") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Matrix A(4, 4), B(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = nd(rng), B(i, j) = nd(rng);
  A = (A + A.transpose()).eval();
  B = (B + B.transpose()).eval();
  CHECK((smat(svec(A), 4) - A).norm() < 1e-14);
  CHECK(svec(A).dot(svec(B)) == doctest::Approx((A * B).trace()).epsilon(1e-12));
  CHECK(svec(A).size() == 10);
}

TEST_CASE("affine products evaluate like their constant counterparts") {
  ConicProgram prog;
  const auto X = prog.add_variable("X", 2, 3);
  Vector x(6);
  x << 1, 2, 3, 4, 5, 6;
  Matrix L(2, 2), R(3, 1);
  L << 1, -1, 2, 0.5;
  R << 1, 0, -2;
  const Matrix Xv = prog.value(x, X);
  CHECK(Xv(1, 0) == 2.0);  // column-major
  const AffineMatrix e = L * prog.expr(X) * R + AffineMatrix::constant(Matrix::Constant(2, 1, 3.0));
  CHECK(e.rows() == 2);
  CHECK((e.evaluate(x) - (L * Xv * R).array().matrix() - Matrix::Constant(2, 1, 3.0)).norm() < 1e-14);
  CHECK((prog.expr(X).transpose().evaluate(x) - Xv.transpose()).norm() == 0.0);
  CHECK(prog.expr(X).sum().evaluate(x)(0, 0) == 21.0);
}

TEST_CASE("masked entries are fixed to zero") {
  ConicProgram prog;
  BoolMatrix mask(2, 2);
  mask << true, false, true, true;
  const auto P = prog.add_variable("P", mask);
  CHECK(prog.num_scalars() == 3);
  CHECK(prog.variable(P).index[2] == -1);  // entry (0, 1)
}

TEST_CASE("linear program matches vertex enumeration") {
  // max x1 + x2 s.t. x1 + 2 x2 <= 4, 3 x1 + x2 <= 6, x >= 0.
  Matrix F(4, 2);
  F << 1, 2, 3, 1, -1, 0, 0, -1;
  const Vector b = scalar_vec({4, 6, 0, 0});
  double best = -1e300;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      Matrix M(2, 2);
      M << F.row(i), F.row(j);
      if (std::abs(M.determinant()) < 1e-12) continue;
      const Vector v = M.partialPivLu().solve(Vector(scalar_vec({b(i), b(j)})));
      if (((F * v - b).array() <= 1e-12).all()) best = std::max(best, v.sum());
    }
  }
  ConicProgram prog;
  const auto x = prog.add_variable("x", 2, 1);
  prog.add_nonneg(AffineMatrix::constant(b) - F * prog.expr(x));
  prog.minimize(-prog.expr(x).sum());
  const ConicSolution sol = solve(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(-best).epsilon(1e-7));
  CHECK(sol.values.at("x")(0, 0) == doctest::Approx(1.6).epsilon(1e-6));
}

TEST_CASE("second-order cone: distance to a hyperplane") {
  // min ||x||_2 s.t. a'x = c has value |c| / ||a||.
  ConicProgram prog;
  const auto x = prog.add_variable("x", 3, 1);
  const auto t = prog.add_variable("t", 1, 1);
  Matrix a(1, 3);
  a << 1, -2, 2;
  prog.add_equality(a * prog.expr(x) - 6.0);
  prog.add_second_order(prog.expr(t), prog.expr(x));
  prog.minimize(prog.expr(t));
  const ConicSolution sol = solve(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(2.0).epsilon(1e-7));
  CHECK((sol.values.at("x") - 6.0 / 9.0 * a.transpose()).norm() < 1e-6);
}

TEST_CASE("PSD epigraph of the spectral norm matches the SVD") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 3; ++trial) {
    Matrix M(3 + trial, 4);
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = nd(rng);
    ConicProgram prog;
    const auto g = prog.add_variable("g", 1, 1);
    add_spectral_norm(prog, AffineMatrix::constant(M), prog.expr(g), SpectralMode::PSD);
    prog.minimize(prog.expr(g));
    const ConicSolution sol = solve(prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const double sv = Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
    CHECK(sol.objective_value == doctest::Approx(sv).epsilon(1e-6));
  }
}

TEST_CASE("Frobenius surrogate bounds the spectral norm from above") {
  Matrix M(2, 2);
  M << 3, 1, 0, 2;
  ConicProgram prog;
  const auto g = prog.add_variable("g", 1, 1);
  add_spectral_norm(prog, AffineMatrix::constant(M), prog.expr(g), SpectralMode::FrobeniusSurrogate);
  prog.minimize(prog.expr(g));
  const ConicSolution sol = solve(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(M.norm()).epsilon(1e-7));
}

TEST_CASE("matrix infinity-norm constraint") {
  // max sum(M) with max row 1-norm <= 1: every row sums to 1.
  ConicProgram prog;
  const auto M = prog.add_variable("M", 3, 2);
  add_matrix_inf_norm(prog, prog.expr(M), AffineMatrix(1.0));
  prog.minimize(-prog.expr(M).sum());
  const ConicSolution sol = solve(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(-3.0).epsilon(1e-7));
  CHECK(sol.values.at("M").cwiseAbs().rowwise().sum().maxCoeff() <= 1.0 + 1e-7);
}

TEST_CASE("row one-norm epigraph") {
  // min ||x - c||_1 over x with sum(x) = 0; value is |sum(c)| when all c share a sign.
  ConicProgram prog;
  const auto x = prog.add_variable("x", 1, 3);
  const Matrix c = (Matrix(1, 3) << 1, 2, 0.5).finished();
  prog.add_equality(prog.expr(x).sum());
  const AffineMatrix bound = one_norm_epigraph(prog, prog.expr(x) - AffineMatrix::constant(c));
  prog.minimize(bound);
  const ConicSolution sol = solve(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(3.5).epsilon(1e-7));
}

TEST_CASE("infeasibility and unboundedness are detected") {
  {
    ConicProgram prog;
    const auto x = prog.add_variable("x", 1, 1);
    prog.add_nonneg(prog.expr(x) - 1.0);
    prog.add_nonneg(-prog.expr(x));
    prog.minimize(prog.expr(x));
    CHECK(solve(prog).status == SolveStatus::Infeasible);
  }
  {
    ConicProgram prog;
    const auto x = prog.add_variable("x", 1, 1);
    prog.add_nonneg(1.0 - prog.expr(x));
    prog.minimize(prog.expr(x));
    CHECK(solve(prog).status == SolveStatus::Unbounded);
  }
}

TEST_CASE("lowering produces consistent cone dimensions") {
  ConicProgram prog;
  const auto x = prog.add_variable("x", 2, 1);
  const auto t = prog.add_variable("t", 1, 1);
  prog.add_nonneg(prog.expr(x));
  prog.add_second_order(prog.expr(t), prog.expr(x));
  const AffineMatrix tt = prog.expr(t);
  prog.add_psd(AffineMatrix::vstack({AffineMatrix::hstack({tt, AffineMatrix(0.0)}),
                                     AffineMatrix::hstack({AffineMatrix(0.0), tt})}));
  prog.minimize(prog.expr(t));
  const StandardForm sf = prog.lower();
  CHECK(sf.dims.l == 2);
  REQUIRE(sf.dims.q.size() == 1);
  CHECK(sf.dims.q[0] == 3);
  REQUIRE(sf.dims.s.size() == 1);
  CHECK(sf.dims.s[0] == 2);
  CHECK(sf.G.rows() == sf.dims.rows());
  CHECK(sf.dims.degree() == 2 + 1 + 2);
}
