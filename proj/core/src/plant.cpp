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

#include "safebiop/plant.hpp"

#include <cmath>
#include <limits>

#include "safebiop/random.hpp"

namespace safebiop {

OpenLoopResult simulate_open_loop(const StateSpaceModel& model, const SignalTrajectory& inputs,
                                  const NoiseSpec& noise) {
  model.validate();
  require_dim("input block size", model.m(), inputs.dim);
  NoiseSampler sampler(noise, noise.seed);
  const int T = inputs.length();
  Vector w = sampler.input_noise(static_cast<Eigen::Index>(model.m()) * T);
  Vector v = sampler.output_noise(static_cast<Eigen::Index>(model.p()) * T);
  return simulate_open_loop(model, inputs, w, v);
}

OpenLoopResult simulate_open_loop(const StateSpaceModel& model, const SignalTrajectory& inputs, const Vector& w,
                                  const Vector& v) {
  model.validate();
  require_dim("input block size", model.m(), inputs.dim);
  const int T = inputs.length();
  const int n = model.n(), m = model.m(), p = model.p();
  require_dim("input noise length", static_cast<Eigen::Index>(m) * T, w.size());
  require_dim("output noise length", static_cast<Eigen::Index>(p) * T, v.size());
  OpenLoopResult out;
  out.outputs = SignalTrajectory::zeros(p, T);
  out.states = SignalTrajectory::zeros(n, T);
  out.w = w;
  out.v = v;
  Vector x = model.x0;
  for (int t = 0; t < T; ++t) {
    out.states.set(t, x);
    out.outputs.set(t, model.C * x + v.segment(static_cast<Eigen::Index>(t) * p, p));
    x = model.A * x + model.B * (inputs.at(t) + w.segment(static_cast<Eigen::Index>(t) * m, m));
  }
  return out;
}

Matrix true_impulse_response(const StateSpaceModel& model, int N) {
  model.validate();
  if (N < 1) throw std::invalid_argument("true_impulse_response: N must be at least 1");
  const int p = model.p(), m = model.m();
  Matrix col = Matrix::Zero(static_cast<Eigen::Index>(p) * N, m);
  Matrix AkB = model.B;
  for (int k = 1; k < N; ++k) {
    col.block(static_cast<Eigen::Index>(k) * p, 0, p, m) = model.C * AkB;
    AkB = model.A * AkB;
  }
  return col;
}

Vector true_free_response(const StateSpaceModel& model, int N) {
  model.validate();
  if (N < 1) throw std::invalid_argument("true_free_response: N must be at least 1");
  const int p = model.p();
  Vector y(static_cast<Eigen::Index>(p) * N);
  Vector x = model.x0;
  for (int t = 0; t < N; ++t) {
    y.segment(static_cast<Eigen::Index>(t) * p, p) = model.C * x;
    x = model.A * x;
  }
  return y;
}

void require_causal(const Matrix& K, int m, int p, int N) {
  require_dim("controller rows", static_cast<Eigen::Index>(m) * N, K.rows());
  require_dim("controller columns", static_cast<Eigen::Index>(p) * N, K.cols());
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      if (K.block(static_cast<Eigen::Index>(i) * m, static_cast<Eigen::Index>(j) * p, m, p).cwiseAbs().maxCoeff() !=
          0.0) {
        throw std::invalid_argument("controller is not causal: nonzero block (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
      }
    }
  }
}

ClosedLoopRollout simulate_closed_loop(const StateSpaceModel& model, const Matrix& K, const Vector& w,
                                       const Vector& v) {
  model.validate();
  const int m = model.m(), p = model.p();
  if (p == 0 || K.cols() % p != 0) throw DimensionError("controller columns not a multiple of p");
  const int N = static_cast<int>(K.cols() / p);
  require_causal(K, m, p, N);
  require_dim("input noise length", static_cast<Eigen::Index>(m) * N, w.size());
  require_dim("output noise length", static_cast<Eigen::Index>(p) * N, v.size());
  ClosedLoopRollout out;
  out.y = SignalTrajectory::zeros(p, N);
  out.u = SignalTrajectory::zeros(m, N);
  out.w = w;
  out.v = v;
  Vector x = model.x0;
  for (int t = 0; t < N; ++t) {
    const Eigen::Index rp = static_cast<Eigen::Index>(t) * p, rm = static_cast<Eigen::Index>(t) * m;
    out.y.values.segment(rp, p) = model.C * x + v.segment(rp, p);
    const Vector ut = K.block(rm, 0, m, rp + p) * out.y.values.head(rp + p) + w.segment(rm, m);
    out.u.values.segment(rm, m) = ut;
    x = model.A * x + model.B * ut;
  }
  return out;
}

std::vector<ClosedLoopRollout> simulate_closed_loop(const StateSpaceModel& model, const Matrix& K,
                                                    const NoiseSpec& noise, int realizations) {
  if (realizations < 0) throw std::invalid_argument("simulate_closed_loop: negative realization count");
  const int m = model.m(), p = model.p();
  if (p == 0 || K.cols() % p != 0) throw DimensionError("controller columns not a multiple of p");
  const int N = static_cast<int>(K.cols() / p);
  std::vector<ClosedLoopRollout> out;
  out.reserve(realizations);
  for (int r = 0; r < realizations; ++r) {
    NoiseSampler sampler(noise, derive_seed(noise.seed, static_cast<std::uint64_t>(r)));
    Vector w = sampler.input_noise(static_cast<Eigen::Index>(m) * N);
    Vector v = sampler.output_noise(static_cast<Eigen::Index>(p) * N);
    out.push_back(simulate_closed_loop(model, K, w, v));
  }
  return out;
}

namespace {

void check_side(const SignalTrajectory& sig, const Matrix& F, const Vector& b, const std::vector<int>& steps,
                std::vector<double>& slack, SafetyReport& report) {
  std::vector<int> ts = steps;
  if (ts.empty()) {
    for (int t = 0; t < sig.length(); ++t) ts.push_back(t);
  }
  for (int t : ts) {
    if (t >= sig.length()) throw std::invalid_argument("check_safety: constrained step beyond trajectory length");
    const Vector s = b - F * sig.at(t);
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      slack.push_back(s(j));
      report.min_slack = std::min(report.min_slack, s(j));
      if (s(j) < 0.0 && report.all_safe) {
        report.all_safe = false;
        report.first_violation_step = t;
      } else if (s(j) < 0.0 && t < report.first_violation_step) {
        report.first_violation_step = t;
      }
    }
  }
}

}  // namespace

SafetyReport check_safety(const SignalTrajectory& y, const SignalTrajectory& u, const SafetyPolytope& poly) {
  poly.validate(y.dim, u.dim);
  SafetyReport report;
  report.min_slack = std::numeric_limits<double>::infinity();
  check_side(y, poly.F_y, poly.b_y, poly.y_steps, report.y_slack, report);
  check_side(u, poly.F_u, poly.b_u, poly.u_steps, report.u_slack, report);
  return report;
}

}  // namespace safebiop
