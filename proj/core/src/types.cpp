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

#include "safebiop/types.hpp"

#include <algorithm>
#include <cmath>

namespace safebiop {

void require_dim(const std::string& what, Eigen::Index expected, Eigen::Index got) {
  if (expected != got) {
    throw DimensionError(what + ": expected " + std::to_string(expected) + ", got " + std::to_string(got));
  }
}

SignalTrajectory::SignalTrajectory(Vector v, int d) : values(std::move(v)), dim(d) {
  if (d <= 0) throw std::invalid_argument("SignalTrajectory: block size must be positive");
  if (values.size() % d != 0) {
    throw DimensionError("SignalTrajectory: length " + std::to_string(values.size()) +
                         " is not divisible by block size " + std::to_string(d));
  }
}

int SignalTrajectory::length() const { return static_cast<int>(values.size() / dim); }

Vector SignalTrajectory::at(int t) const {
  if (t < 0 || t >= length()) throw std::out_of_range("SignalTrajectory::at: time index out of range");
  return values.segment(static_cast<Eigen::Index>(t) * dim, dim);
}

void SignalTrajectory::set(int t, const Vector& value) {
  if (t < 0 || t >= length()) throw std::out_of_range("SignalTrajectory::set: time index out of range");
  require_dim("SignalTrajectory::set value", dim, value.size());
  values.segment(static_cast<Eigen::Index>(t) * dim, dim) = value;
}

SignalTrajectory SignalTrajectory::zeros(int dim, int length) {
  return SignalTrajectory(Vector::Zero(static_cast<Eigen::Index>(dim) * length), dim);
}

void StateSpaceModel::validate() const {
  require_dim("A columns", A.rows(), A.cols());
  require_dim("B rows", A.rows(), B.rows());
  require_dim("C columns", A.rows(), C.cols());
  require_dim("x0 length", A.rows(), x0.size());
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !x0.allFinite()) {
    throw std::invalid_argument("StateSpaceModel: non-finite entry");
  }
}

StateSpaceModel benchmark_model(double rho, const Vector& x0) {
  StateSpaceModel model;
  model.A.resize(2, 2);
  model.A << 1.0, 0.25, 0.0, 1.0;
  model.A *= rho;
  model.B.resize(2, 1);
  model.B << 0.0, 0.1;
  model.C.resize(1, 2);
  model.C << 1.0, -1.0;
  model.x0 = x0;
  model.validate();
  return model;
}

void NoiseSpec::validate() const {
  if (!(w_inf >= 0.0) || !(v_inf >= 0.0)) throw std::invalid_argument("NoiseSpec: bounds must be nonnegative");
  if (distribution == NoiseDistribution::TruncatedGaussian && !(sigma > 0.0)) {
    throw std::invalid_argument("NoiseSpec: sigma must be positive");
  }
}

void SafetyPolytope::validate(int p, int m) const {
  if (F_y.rows() > 0) require_dim("F_y columns", p, F_y.cols());
  if (F_u.rows() > 0) require_dim("F_u columns", m, F_u.cols());
  require_dim("b_y length", F_y.rows(), b_y.size());
  require_dim("b_u length", F_u.rows(), b_u.size());
  for (int t : y_steps) {
    if (t < 0) throw std::invalid_argument("SafetyPolytope: negative y step");
  }
  for (int t : u_steps) {
    if (t < 0) throw std::invalid_argument("SafetyPolytope: negative u step");
  }
}

SafetyPolytope SafetyPolytope::box(int p, int m, double y_bound, double u_bound) {
  SafetyPolytope poly;
  poly.F_y.resize(2 * p, p);
  poly.F_y << Matrix::Identity(p, p), -Matrix::Identity(p, p);
  poly.b_y = Vector::Constant(2 * p, y_bound);
  poly.F_u.resize(2 * m, m);
  poly.F_u << Matrix::Identity(m, m), -Matrix::Identity(m, m);
  poly.b_u = Vector::Constant(2 * m, u_bound);
  return poly;
}

SafetyPolytope SafetyPolytope::empty(int p, int m) {
  SafetyPolytope poly;
  poly.F_y.resize(0, p);
  poly.b_y.resize(0);
  poly.F_u.resize(0, m);
  poly.b_u.resize(0);
  return poly;
}

namespace {

std::vector<int> active_steps(const std::vector<int>& steps, int N) {
  std::vector<int> out;
  if (steps.empty()) {
    for (int t = 0; t < N; ++t) out.push_back(t);
    return out;
  }
  for (int t : steps) {
    if (t >= N) throw std::invalid_argument("SafetyPolytope: step " + std::to_string(t) + " beyond horizon");
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void stack_side(const Matrix& F, const Vector& b, const std::vector<int>& steps, int d, int N, Matrix& Fs,
                Vector& bs) {
  const std::vector<int> ts = active_steps(steps, N);
  const Eigen::Index s = F.rows();
  Fs = Matrix::Zero(s * static_cast<Eigen::Index>(ts.size()), static_cast<Eigen::Index>(d) * N);
  bs.resize(Fs.rows());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    Fs.block(static_cast<Eigen::Index>(k) * s, static_cast<Eigen::Index>(ts[k]) * d, s, d) = F;
    bs.segment(static_cast<Eigen::Index>(k) * s, s) = b;
  }
}

}  // namespace

StackedConstraints stack_polytope(const SafetyPolytope& poly, int p, int m, int N) {
  poly.validate(p, m);
  StackedConstraints out;
  stack_side(poly.F_y, poly.b_y, poly.y_steps, p, N, out.Fy, out.by);
  stack_side(poly.F_u, poly.b_u, poly.u_steps, m, N, out.Fu, out.bu);
  return out;
}

}  // namespace safebiop
