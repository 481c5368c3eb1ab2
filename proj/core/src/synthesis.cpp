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


#include "safebiop/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "safebiop/parallel.hpp"
#include "safebiop/random.hpp"

namespace safebiop {

using conic::AffineMatrix;
using conic::ConicProgram;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Dims {
  int p = 1;
  int m = 1;
  int N = 1;
};

Dims dims_of(const Matrix& g_column, const CostWeights& weights) {
  Dims d;
  d.p = static_cast<int>(weights.Sigma_v.rows());
  if (d.p <= 0) throw DimensionError("CostWeights: Sigma_v is empty");
  if (g_column.rows() == 0 || g_column.rows() % d.p != 0) {
    throw DimensionError("impulse column rows must be a positive multiple of p");
  }
  d.N = static_cast<int>(g_column.rows() / d.p);
  d.m = static_cast<int>(g_column.cols());
  weights.validate(d.p, d.m, d.N);
  return d;
}

/// Run fn(i) for i in [0, n) on up to `threads` workers; rethrows the first exception.

conic::BoolMatrix causal_mask(const Dims& d) {
  conic::BoolMatrix mask(d.m * d.N, d.p * d.N);
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) mask(r, c) = (r / d.m) >= (c / d.p);
  }
  return mask;
}

/// Everything the shared program builder needs; the decision variable is the causal part of Phi_uy.
struct ProgramSpec {
  Dims dims;
  Matrix G;
  Vector y0_objective;
  Vector y0_linear;
  double scale_yy = 1.0;
  double scale_uy = 1.0;
  const CostWeights* weights = nullptr;
  StackedConstraints cons;
  RowCoefficients coef;
  double gamma_cap = kInf;
  double tau_cap = kInf;
};

struct ProgramOutcome {
  SynthesisStatus status = SynthesisStatus::SolverFailure;
  Matrix phi_uy;
  int iterations = 0;
};

SynthesisStatus map_status(conic::SolveStatus s) {
  switch (s) {
    case conic::SolveStatus::Optimal:
      return SynthesisStatus::Optimal;
    case conic::SolveStatus::Infeasible:
      return SynthesisStatus::Infeasible;
    default:
      return SynthesisStatus::SolverFailure;
  }
}

/// Adds a1 ||f P1||_1 + a2 ||f P2||_1 + f P1 y0 <= b for every row; rows that differ only in sign share epigraphs.
void add_safety_rows(ConicProgram& prog, const Matrix& F, const Vector& b, const AffineMatrix& P1,
                     const AffineMatrix& P2, const Vector& y0, const RowCoefficients& coef, const std::string& tag) {
  struct Cached {
    Eigen::Index row;
    AffineMatrix norms;
  };
  std::vector<Cached> cache;
  const Matrix y0m = y0;
  for (Eigen::Index j = 0; j < F.rows(); ++j) {
    const Matrix f = F.row(j);
    const AffineMatrix fP1 = f * P1;
    AffineMatrix norms(0.0);
    bool found = false;
    for (const auto& c : cache) {
      if (F.row(c.row) == F.row(j) || F.row(c.row) == -F.row(j)) {
        norms = c.norms;
        found = true;
        break;
      }
    }
    if (!found) {
      if (coef.a1 != 0.0) norms += coef.a1 * conic::one_norm_epigraph(prog, fP1, tag + "_abs1");
      if (coef.a2 != 0.0) norms += coef.a2 * conic::one_norm_epigraph(prog, f * P2, tag + "_abs2");
      cache.push_back(Cached{j, norms});
    }
    prog.add_nonneg(AffineMatrix(b(j)) - norms - fP1 * y0m, tag + "_row" + std::to_string(j));
  }
}

/// Worst-case rows with Phi_uy fixed at zero.
bool zero_policy_feasible(const ProgramSpec& s) {
  const Dims& d = s.dims;
  const ClosedLoopMaps maps = maps_from_phi_uy(Matrix::Zero(d.m * d.N, d.p * d.N), s.G);
  auto check = [&](const Matrix& F, const Vector& b, const Matrix& P1, const Matrix& P2) {
    if (F.rows() == 0) return true;
    const Matrix FP1 = F * P1, FP2 = F * P2;
    const Vector lhs = s.coef.a1 * FP1.cwiseAbs().rowwise().sum() + s.coef.a2 * FP2.cwiseAbs().rowwise().sum() +
                       FP1 * s.y0_linear;
    return ((lhs - b).array() <= 1e-12).all();
  };
  return check(s.cons.Fy, s.cons.by, maps.yy, maps.yu) && check(s.cons.Fu, s.cons.bu, maps.uy, maps.uu);
}

ProgramOutcome solve_program(const ProgramSpec& s, const conic::SolverOptions& opt) {
  const Dims& d = s.dims;
  const int py = d.p * d.N, mu = d.m * d.N;
  ProgramOutcome out;
  if (s.gamma_cap <= 0.0 || s.tau_cap <= 0.0) {
    out.phi_uy = Matrix::Zero(mu, py);
    out.status = zero_policy_feasible(s) ? SynthesisStatus::Optimal : SynthesisStatus::Infeasible;
    return out;
  }
  ConicProgram prog;
  const auto X = prog.add_variable("phi_uy", causal_mask(d));
  const AffineMatrix Puy = prog.expr(X);
  const AffineMatrix Pyy = AffineMatrix::constant(Matrix::Identity(py, py)) + s.G * Puy;
  const AffineMatrix Pyu = Pyy * s.G;
  const AffineMatrix Puu = AffineMatrix::constant(Matrix::Identity(mu, mu)) + Puy * s.G;

  const CostWeights& w = *s.weights;
  const Matrix Qh = w.Q_sqrt(), Rh = w.R_sqrt();
  const Matrix Sv = w.Sigma_v_sqrt(d.N), Sw = w.Sigma_w_sqrt(d.N);
  const Matrix y0o = s.y0_objective;
  const AffineMatrix top = AffineMatrix::hstack({s.scale_yy * (Qh * Pyy * Sv), Qh * Pyu * Sw, Qh * Pyy * y0o});
  const AffineMatrix bottom = AffineMatrix::hstack({s.scale_uy * (Rh * Puy * Sv), Rh * Puu * Sw, Rh * Puy * y0o});
  const auto t = prog.add_variable("t", 1, 1);
  conic::add_frobenius_epigraph(prog, AffineMatrix::vstack({top, bottom}), prog.expr(t));

  if (std::isfinite(s.gamma_cap)) {
    conic::add_spectral_norm(prog, Puy, AffineMatrix(s.gamma_cap), conic::SpectralMode::PSD);
  }
  if (std::isfinite(s.tau_cap)) conic::add_matrix_inf_norm(prog, Puy, AffineMatrix(s.tau_cap));
  add_safety_rows(prog, s.cons.Fy, s.cons.by, Pyy, Pyu, s.y0_linear, s.coef, "y");
  add_safety_rows(prog, s.cons.Fu, s.cons.bu, Puy, Puu, s.y0_linear, s.coef, "u");
  prog.minimize(prog.expr(t));

  const conic::ConicSolution sol = conic::solve(prog, opt);
  out.status = map_status(sol.status);
  out.iterations = sol.iterations;
  if (out.status == SynthesisStatus::Optimal) out.phi_uy = sol.values.at("phi_uy");
  return out;
}

void fill_maps(SynthesisResult& r, const Matrix& phi_uy, const Matrix& G) {
  r.maps_hat = maps_from_phi_uy(phi_uy, G);
  r.controller = controller_from_responses(r.maps_hat);
}

/// The robust cost bound is stated for R = r I and unit noise covariances.
void require_robust_weights(const CostWeights& w) {
  auto near = [](const Matrix& A, const Matrix& B) { return (A - B).cwiseAbs().maxCoeff() <= 1e-12; };
  const double r = w.R_blocks.empty() ? 1.0 : w.R_blocks.front()(0, 0);
  for (const auto& R : w.R_blocks) {
    if (!near(R, r * Matrix::Identity(R.rows(), R.cols()))) {
      throw std::invalid_argument("robust synthesis requires R blocks equal to r * I with a common r");
    }
  }
  if (!near(w.Sigma_v, Matrix::Identity(w.Sigma_v.rows(), w.Sigma_v.cols())) ||
      !near(w.Sigma_w, Matrix::Identity(w.Sigma_w.rows(), w.Sigma_w.cols()))) {
    throw std::invalid_argument("robust synthesis requires identity noise covariances");
  }
}

void require_errors(const EstimateBundle& b) {
  if (!b.errors_set) throw std::invalid_argument("estimate bundle has no error levels; call assess_errors first");
  if (!(b.eps2 >= 0.0) || !(b.eps_inf >= 0.0)) throw std::invalid_argument("error levels must be >= 0");
}

double h_or_zero(double eps, double gamma, double norm2) { return eps == 0.0 ? 0.0 : h_value(eps, gamma, norm2); }

bool better(const SynthesisResult& a, const SynthesisResult& b) {
  if (a.status != SynthesisStatus::Optimal) return false;
  if (b.status != SynthesisStatus::Optimal) return true;
  const double tol = 1e-9 * std::max(1.0, std::abs(b.j_robust));
  if (a.j_robust < b.j_robust - tol) return true;
  if (a.j_robust > b.j_robust + tol) return false;
  if (a.hyper.gamma != b.hyper.gamma) return a.hyper.gamma < b.hyper.gamma;
  return a.hyper.tau < b.hyper.tau;
}

}  // namespace

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

const char* to_string(SynthesisStatus status) {
  switch (status) {
    case SynthesisStatus::Optimal:
      return "optimal";
    case SynthesisStatus::Infeasible:
      return "infeasible";
    case SynthesisStatus::SolverFailure:
      return "solver_failure";
  }
  return "unknown";
}

nlohmann::json to_json(const HyperParams& h) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json("inf"); };
  return {{"gamma", num(h.gamma)}, {"tau", num(h.tau)}, {"alpha", num(h.alpha)}};
}

nlohmann::json to_json(const BoundTerms& b) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json("inf"); };
  return {{"eta", b.eta},          {"zeta", b.zeta},         {"M_c", b.M_c},
          {"V_c", b.V_c},          {"S_eps", num(b.S_eps)},  {"bound_value", num(b.bound_value)},
          {"certified", b.certified}};
}

nlohmann::json to_json(const SynthesisResult& r) {
  nlohmann::json j;
  j["status"] = to_string(r.status);
  j["hyper"] = to_json(r.hyper);
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json("inf"); };
  j["j_robust"] = num(r.j_robust);
  j["j_inner"] = num(r.j_inner);
  j["solves"] = r.solves;
  j["solver_iterations"] = r.solver_iterations;
  nlohmann::json K;
  K["rows"] = r.controller.rows();
  K["cols"] = r.controller.cols();
  K["block_rows"] = r.m;
  K["block_cols"] = r.p;
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(r.controller.size()));
  for (Eigen::Index i = 0; i < r.controller.rows(); ++i) {
    for (Eigen::Index k = 0; k < r.controller.cols(); ++k) data.push_back(r.controller(i, k));
  }
  K["data"] = data;
  j["controller"] = K;
  if (r.diagnostics) j["diagnostics"] = to_json(*r.diagnostics);
  return j;
}

SynthesisResult solve_nominal(const Matrix& g_column, const Vector& y0, const SafetyPolytope& polytope,
                              const NoiseSpec& noise, const CostWeights& weights, const SynthesisOptions& options) {
  const Dims d = dims_of(g_column, weights);
  require_dim("y0 length", d.p * d.N, y0.size());
  polytope.validate(d.p, d.m);
  noise.validate();
  ProgramSpec s;
  s.dims = d;
  s.G = toeplitz_expand(ToeplitzOperator(g_column, d.p));
  s.y0_objective = y0;
  s.y0_linear = y0;
  s.weights = &weights;
  s.cons = stack_polytope(polytope, d.p, d.m, d.N);
  s.coef = nominal_coefficients(noise);
  const ProgramOutcome o = solve_program(s, options.solver);

  SynthesisResult r;
  r.p = d.p;
  r.m = d.m;
  r.N = d.N;
  r.status = o.status;
  r.hyper = HyperParams{kInf, kInf, kInf};
  r.solves = 1;
  r.solver_iterations = o.iterations;
  r.j_inner = r.j_robust = kInf;
  if (o.status == SynthesisStatus::Optimal) {
    fill_maps(r, o.phi_uy, s.G);
    r.j_inner = r.j_robust = cost_j(r.maps_hat, y0, weights);
  }
  return r;
}

SynthesisResult solve_robust_inner(const EstimateBundle& bundle, const SafetyPolytope& polytope,
                                   const NoiseSpec& noise, const CostWeights& weights, const HyperParams& hyper,
                                   const SynthesisOptions& options) {
  require_errors(bundle);
  const Dims d = dims_of(bundle.g_column, weights);
  require_dim("y0_hat length", d.p * d.N, bundle.y0_hat.size());
  polytope.validate(d.p, d.m);
  noise.validate();
  require_robust_weights(weights);
  const double e2 = bundle.eps2, ei = bundle.eps_inf;
  if (!(hyper.gamma >= 0.0) || !(hyper.tau >= 0.0) || !(hyper.alpha >= 0.0)) {
    throw std::invalid_argument("hyper-parameters must be >= 0");
  }
  if (e2 > 0.0 && !(e2 * hyper.gamma < 1.0)) throw std::invalid_argument("eps2 * gamma must be < 1");
  if (e2 > 0.0 && !(e2 * hyper.alpha < 1.0)) throw std::invalid_argument("eps2 * alpha must be < 1");
  const StackedConstraints cons = stack_polytope(polytope, d.p, d.m, d.N);
  const bool has_rows = cons.Fy.rows() > 0 || cons.Fu.rows() > 0;
  // Without safety rows tau only caps ||Phi_uy||_inf, so +inf (no cap) is allowed.
  if (ei > 0.0 && !(ei * hyper.tau < 1.0) && !(!has_rows && std::isinf(hyper.tau))) {
    throw std::invalid_argument("eps_inf * tau must be < 1");
  }
  if (hyper.gamma > hyper.alpha * (1.0 + 1e-12)) throw std::invalid_argument("gamma must not exceed alpha");

  ProgramSpec s;
  s.dims = d;
  s.G = toeplitz_expand(ToeplitzOperator(bundle.g_column, d.p));
  const double hG = h_or_zero(e2, hyper.alpha, spectral_norm(s.G));
  const double hy = h_or_zero(e2, hyper.alpha, bundle.y0_hat.norm());
  s.y0_objective = bundle.y0_hat;
  s.y0_linear = bundle.y0_hat;
  s.scale_yy = std::sqrt(1.0 + hG + hy);
  s.scale_uy = std::sqrt(1.0 + hy);
  s.weights = &weights;
  s.cons = cons;
  s.coef = ei == 0.0 || !has_rows ? nominal_coefficients(noise)
                     : tightened_coefficients(hyper.tau, ei, inf_norm(s.G),
                                              bundle.y0_hat.lpNorm<Eigen::Infinity>(), noise);
  s.gamma_cap = hyper.gamma;
  s.tau_cap = hyper.tau;
  const ProgramOutcome o = solve_program(s, options.solver);

  SynthesisResult r;
  r.p = d.p;
  r.m = d.m;
  r.N = d.N;
  r.status = o.status;
  r.hyper = hyper;
  r.solves = 1;
  r.solver_iterations = o.iterations;
  r.j_inner = r.j_robust = kInf;
  if (o.status == SynthesisStatus::Optimal) {
    fill_maps(r, o.phi_uy, s.G);
    r.j_inner = inner_cost(r.maps_hat, bundle.y0_hat, hG, hy, weights);
    r.j_robust = e2 == 0.0 ? r.j_inner : r.j_inner / (1.0 - e2 * hyper.gamma);
  }
  return r;
}

double robust_cost(const EstimateBundle& bundle, const SafetyPolytope& polytope, const NoiseSpec& noise,
                   const CostWeights& weights, const HyperParams& hyper, const SynthesisOptions& options) {
  const SynthesisResult r = solve_robust_inner(bundle, polytope, noise, weights, hyper, options);
  return r.status == SynthesisStatus::Optimal ? r.j_robust : kInf;
}

std::pair<double, double> golden_section(const std::function<double(double)>& f, double a, double b,
                                         int iterations) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  std::pair<double, double> best = fc <= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
  for (int it = 0; it < iterations; ++it) {
    // Both infinite: the cap is too tight on the left part, move right.
    const bool go_left = fc <= fd && !(std::isinf(fc) && std::isinf(fd));
    if (go_left) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
      if (fc < best.second || (fc == best.second && c < best.first)) best = {c, fc};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
      if (fd < best.second || (fd == best.second && d < best.first)) best = {d, fd};
    }
  }
  return best;
}

SynthesisResult search_hyperparams(const EstimateBundle& bundle, const SafetyPolytope& polytope,
                                   const NoiseSpec& noise, const CostWeights& weights,
                                   const SearchStrategy& strategy, const SynthesisOptions& options) {
  require_errors(bundle);
  const double e2 = bundle.eps2, ei = bundle.eps_inf;
  if (e2 == 0.0 && ei == 0.0) {
    return solve_robust_inner(bundle, polytope, noise, weights, HyperParams{kInf, kInf, kInf}, options);
  }
  const int threads = options.threads;
  SynthesisOptions inner = options;
  inner.threads = 1;
  auto eval = [&](const HyperParams& h) { return solve_robust_inner(bundle, polytope, noise, weights, h, inner); };

  SynthesisResult best;
  best.status = SynthesisStatus::Infeasible;
  best.j_inner = best.j_robust = kInf;
  int solves = 0, iterations = 0;

  if (const auto* grid = std::get_if<GridRandom>(&strategy)) {
    if (grid->n_points <= 0) throw std::invalid_argument("GridRandom: n_points must be > 0");
    Rng rng(grid->seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<HyperParams> points(static_cast<std::size_t>(grid->n_points));
    const double gmax = e2 > 0.0 ? (grid->alpha ? std::min(*grid->alpha, 1.0 / e2) : 1.0 / e2) : kInf;
    for (auto& h : points) {
      h.gamma = std::isfinite(gmax) ? unit(rng) * gmax : kInf;
      h.tau = ei > 0.0 ? unit(rng) / ei : kInf;
      h.alpha = grid->alpha ? *grid->alpha : h.gamma;
    }
    std::vector<SynthesisResult> results(points.size());
    parallel_for(grid->n_points, threads, [&](int i) { results[i] = eval(points[i]); });
    for (auto& r : results) {
      solves += r.solves;
      iterations += r.solver_iterations;
      if (better(r, best)) best = std::move(r);
    }
  } else {
    const auto& gold = std::get<GoldenGamma>(strategy);
    double alpha = e2 > 0.0 ? 0.999 / e2 : kInf;
    if (gold.alpha) {
      alpha = *gold.alpha;
    } else if (gold.alpha_nominal_multiple && e2 > 0.0) {
      EstimateBundle exact = bundle;
      exact.eps2 = exact.eps_inf = 0.0;
      const SynthesisResult nom = solve_robust_inner(exact, polytope, noise, weights, HyperParams{kInf, kInf, kInf},
                                                     inner);
      ++solves;
      if (nom.status == SynthesisStatus::Optimal) {
        alpha = std::min(*gold.alpha_nominal_multiple * spectral_norm(nom.maps_hat.uy), 0.999 / e2);
      }
    }
    std::vector<double> taus = gold.tau_grid;
    if (taus.empty()) {
      const bool has_rows = polytope.F_y.rows() > 0 || polytope.F_u.rows() > 0;
      if (ei == 0.0) {
        taus = {kInf};
      } else if (!has_rows) {
        taus = {kInf};
      } else {
        taus.push_back(0.0);
        for (int k = 0; k < 32; ++k) taus.push_back(std::pow(10.0, -3.0 + 3.0 * k / 31.0) * 0.999 / ei);
        taus.back() = 0.999 / ei;
      }
    }
    const double gmax = e2 > 0.0 ? std::min(alpha, (1.0 - 1e-6) / e2) : kInf;
    std::vector<SynthesisResult> per_tau(taus.size());
    std::vector<int> counts(taus.size(), 0), iters(taus.size(), 0);
    parallel_for(static_cast<int>(taus.size()), threads, [&](int i) {
      const double tau = taus[i];
      SynthesisResult local;
      local.status = SynthesisStatus::Infeasible;
      local.j_robust = kInf;
      auto f = [&](double g) {
        SynthesisResult r = eval(HyperParams{g, tau, std::isfinite(gmax) ? alpha : kInf});
        ++counts[i];
        iters[i] += r.solver_iterations;
        const double v = r.status == SynthesisStatus::Optimal ? r.j_robust : kInf;
        if (better(r, local)) local = std::move(r);
        return v;
      };
      if (!std::isfinite(gmax)) {
        f(kInf);
      } else {
        f(0.0);
        golden_section(f, 0.0, gmax, gold.iterations);
      }
      per_tau[i] = std::move(local);
    });
    for (std::size_t i = 0; i < taus.size(); ++i) {
      solves += counts[i];
      iterations += iters[i];
      if (better(per_tau[i], best)) best = std::move(per_tau[i]);
    }
  }
  best.solves = solves;
  best.solver_iterations = iterations;
  if (best.status != SynthesisStatus::Optimal) {
    const Dims d = dims_of(bundle.g_column, weights);
    best.p = d.p;
    best.m = d.m;
    best.N = d.N;
  }
  return best;
}

OracleResult solve_tightened_oracle(const OracleErrors& truth, const EstimateBundle& bundle,
                                    const SafetyPolytope& polytope, const NoiseSpec& noise,
                                    const CostWeights& weights, const PhiStarNorms& phi_star,
                                    const SynthesisOptions& options) {
  const Dims d = dims_of(truth.truth_column, weights);
  require_dim("estimate rows", truth.truth_column.rows(), bundle.g_column.rows());
  require_dim("estimate columns", truth.truth_column.cols(), bundle.g_column.cols());
  require_dim("y0 length", d.p * d.N, truth.y0.size());
  require_dim("y0_hat length", d.p * d.N, bundle.y0_hat.size());
  polytope.validate(d.p, d.m);
  noise.validate();
  const double zeta = bundle.eps_inf * phi_star.norm_inf;
  if (!(zeta < 0.5)) throw std::invalid_argument("solve_tightened_oracle: zeta must be < 1/2");

  const Matrix G_hat = toeplitz_expand(ToeplitzOperator(bundle.g_column, d.p));
  ProgramSpec s;
  s.dims = d;
  s.G = toeplitz_expand(ToeplitzOperator(truth.truth_column, d.p));
  s.y0_objective = truth.y0;
  s.y0_linear = bundle.y0_hat;
  s.weights = &weights;
  s.cons = stack_polytope(polytope, d.p, d.m, d.N);
  s.coef = oracle_coefficients(zeta, bundle.eps_inf, inf_norm(G_hat), bundle.y0_hat.lpNorm<Eigen::Infinity>(), noise);
  s.gamma_cap = phi_star.norm2;
  s.tau_cap = phi_star.norm_inf;
  const ProgramOutcome o = solve_program(s, options.solver);

  OracleResult r;
  r.status = o.status;
  if (o.status == SynthesisStatus::Optimal) {
    r.maps = maps_from_phi_uy(o.phi_uy, s.G);
    r.controller = controller_from_responses(r.maps);
  }
  return r;
}

std::vector<SPoint> suboptimality_gap_S(const OracleErrors& truth, const EstimateBundle& bundle,
                                        const SafetyPolytope& polytope, const NoiseSpec& noise,
                                        const CostWeights& weights, const std::vector<double>& eps_inf_grid,
                                        const SynthesisOptions& options) {
  const SynthesisResult star = solve_nominal(truth.truth_column, truth.y0, polytope, noise, weights, options);
  if (star.status != SynthesisStatus::Optimal) {
    throw std::invalid_argument("suboptimality_gap_S: the nominal problem on the true plant has no solution");
  }
  const PhiStarNorms norms{spectral_norm(star.maps_hat.uy), inf_norm(star.maps_hat.uy)};
  const double J2 = star.j_inner * star.j_inner;
  std::vector<SPoint> out(eps_inf_grid.size());
  parallel_for(static_cast<int>(eps_inf_grid.size()), options.threads, [&](int i) {
    SPoint& pt = out[i];
    pt.eps_inf = eps_inf_grid[i];
    pt.S = kInf;
    if (!(pt.eps_inf * norms.norm_inf < 0.5)) return;
    EstimateBundle b = bundle;
    b.eps_inf = pt.eps_inf;
    const OracleResult o = solve_tightened_oracle(truth, b, polytope, noise, weights, norms, options);
    if (o.status != SynthesisStatus::Optimal) return;
    const double Jc = cost_j(o.maps, truth.y0, weights);
    pt.feasible = true;
    pt.S = (Jc * Jc - J2) / J2;
  });
  return out;
}

BoundTerms theoretical_bound(const BoundInputs& in) {
  BoundTerms t;
  const double e2 = in.eps2;
  t.eta = e2 * in.phi_star.norm2;
  t.zeta = in.eps_inf * in.phi_star.norm_inf;
  const double hy_a = h_or_zero(e2, in.alpha, in.y0_hat_norm2);
  const double hy_c = h_or_zero(e2, in.phi_c_norm2, in.y0_norm2);
  t.M_c = h_or_zero(e2, in.alpha, in.G_hat_norm2) + hy_a + h_or_zero(e2, in.phi_c_norm2, in.G_norm2) + hy_c;
  t.V_c = hy_a + hy_c;
  t.S_eps = in.S_eps;
  const double MV = t.M_c + t.V_c;
  t.bound_value = std::isfinite(in.S_eps) ? 20.0 * t.eta + 4.0 * MV + 4.0 * in.S_eps * (1.0 + MV) : kInf;
  bool alpha_ok = true;
  if (e2 > 0.0) {
    const double lo = std::sqrt(2.0) * t.eta / (e2 * (1.0 - t.eta));
    alpha_ok = in.alpha >= lo && in.alpha <= 5.0 * in.phi_star.norm2 && e2 * in.alpha < 1.0;
  }
  t.certified = t.eta < 0.2 && t.zeta < 0.5 && alpha_ok && std::isfinite(in.S_eps);
  return t;
}

ExplorationResult safe_exploration_policy(const EstimateBundle& rough_bundle, double eta_inf,
                                          const SafetyPolytope& polytope, const NoiseSpec& noise,
                                          const CostWeights& weights, const SearchStrategy& strategy,
                                          const SynthesisOptions& options) {
  if (!(eta_inf >= 0.0)) throw std::invalid_argument("safe_exploration_policy: eta_inf must be >= 0");
  NoiseSpec inflated = noise;
  inflated.w_inf += eta_inf;
  ExplorationResult r;
  r.synthesis = search_hyperparams(rough_bundle, polytope, inflated, weights, strategy, options);
  r.status = r.synthesis.status;
  if (r.status == SynthesisStatus::Optimal) r.K_r = r.synthesis.controller;
  return r;
}

}  // namespace safebiop
