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


#include "run.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "safebiop/csv.hpp"
#include "safebiop/iop.hpp"
#include "safebiop/parallel.hpp"
#include "safebiop/plant.hpp"
#include "safebiop/synthesis.hpp"

namespace safebiop::expcli {

namespace {

using nlohmann::json;
using csv::format_double;

constexpr double kInf = std::numeric_limits<double>::infinity();

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

json num(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? json("nan") : json(x > 0 ? "inf" : "-inf");
}

struct SolverStats {
  int solves = 0;
  int iterations = 0;
  void add(const SynthesisResult& r) {
    solves += std::max(r.solves, 1);
    iterations += r.solver_iterations;
  }
};

/// Accumulates files and their hashes.
class Emitter {
 public:
  Emitter(std::string dir, bool write) : dir_(std::move(dir)), write_(write) {}

  void emit(const std::string& name, const csv::Table& table) {
    const std::string content = table.str();
    files_.push_back(EmittedFile{name, table.rows(), git_blob_hash(content)});
    if (write_) write_text(name, content);
  }

  void write_text(const std::string& name, const std::string& content) const {
    std::filesystem::create_directories(dir_);
    std::ofstream out(std::filesystem::path(dir_) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (std::filesystem::path(dir_) / name).string());
    out << content;
  }

  std::vector<EmittedFile> files_;

 private:
  std::string dir_;
  bool write_;
};

OracleErrors truth_of(const StateSpaceModel& model, int N) {
  return OracleErrors{true_impulse_response(model, N), true_free_response(model, N)};
}

EstimateBundle bundle_from(const Matrix& g_column, const Vector& y0, int p) {
  EstimateBundle b;
  b.g_column = g_column;
  b.y0_hat = y0;
  b.p = p;
  b.errors_set = true;
  return b;
}

double true_cost(const Matrix& K, const OracleErrors& truth, const CostWeights& weights, int p) {
  const ClosedLoopMaps maps = responses_from_controller(K, ToeplitzOperator(truth.truth_column, p));
  return cost_j(maps, truth.y0, weights);
}

SignalTrajectory gaussian_signal(std::uint64_t seed, int dim, int length, double stddev) {
  Rng rng(seed);
  return SignalTrajectory(gaussian_vector(rng, static_cast<Eigen::Index>(dim) * length, stddev), dim);
}

RunStatus status_of(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::Optimal:
      return RunStatus::Ok;
    case SynthesisStatus::Infeasible:
      return RunStatus::Infeasible;
    case SynthesisStatus::SolverFailure:
      return RunStatus::SolverFailure;
  }
  return RunStatus::SolverFailure;
}

/// Failures dominate infeasibility, which dominates success.
RunStatus worst(RunStatus a, RunStatus b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

EstimateBundle estimate(const CollectedData& data, Estimator estimator, double noise_variance) {
  const HankelPartition part = partition_data(data.record);
  const EstimateBundle est = estimator == Estimator::MaximumLikelihood
                                 ? estimate_ml(part, data.record, std::max(std::sqrt(noise_variance), 1e-12))
                                 : estimate_ls(part, data.record);
  return assess_errors(est, data.truth);
}

std::vector<std::string> signal_header(const char* base, int dim) {
  if (dim == 1) return {base};
  std::vector<std::string> out;
  for (int i = 0; i < dim; ++i) out.push_back(std::string(base) + "_" + std::to_string(i));
  return out;
}

struct RolloutStats {
  bool all_safe = true;
  int unsafe_runs = 0;
  double min_slack = kInf;

  json to_json() const {
    return json{{"all_safe", all_safe}, {"unsafe_runs", unsafe_runs}, {"min_slack", num(min_slack)}};
  }
};

RolloutStats add_rollouts(csv::Table& table, const std::string& label, const StateSpaceModel& model,
                          const Matrix& K, const NoiseSpec& noise, int rollouts, const SafetyPolytope& polytope) {
  RolloutStats stats;
  const std::vector<ClosedLoopRollout> runs = simulate_closed_loop(model, K, noise, rollouts);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const ClosedLoopRollout& run = runs[r];
    const SafetyReport rep = check_safety(run.y, run.u, polytope);
    if (!rep.all_safe) {
      stats.all_safe = false;
      ++stats.unsafe_runs;
    }
    stats.min_slack = std::min(stats.min_slack, rep.min_slack);
    for (int t = 0; t < run.y.length(); ++t) {
      std::vector<std::string> row{std::to_string(r), label, std::to_string(t)};
      const Vector y = run.y.at(t), u = run.u.at(t);
      for (Eigen::Index i = 0; i < y.size(); ++i) row.push_back(format_double(y(i)));
      for (Eigen::Index i = 0; i < u.size(); ++i) row.push_back(format_double(u(i)));
      table.add_row(std::move(row));
    }
  }
  return stats;
}

csv::Table trajectory_table(int p, int m) {
  std::vector<std::string> header{"run_id", "controller", "t"};
  for (const auto& h : signal_header("y", p)) header.push_back(h);
  for (const auto& h : signal_header("u", m)) header.push_back(h);
  return csv::Table(std::move(header));
}

json synthesis_json(const SynthesisResult& r) {
  return json{{"status", to_string(r.status)},   {"hyper", to_json(r.hyper)},
              {"j_robust", num(r.j_robust)},     {"j_inner", num(r.j_inner)},
              {"solves", r.solves},              {"solver_iterations", r.solver_iterations}};
}

// ---------------------------------------------------------------------------------------------------------------

RunStatus run_safe_trajectories(const ExperimentConfig& cfg, std::uint64_t seed, const SynthesisOptions& opts,
                                Emitter& out, RunSummary& summary) {
  const StateSpaceModel model = cfg.model.build();
  const int N = cfg.horizon, p = model.p(), m = model.m();
  const OracleErrors truth = truth_of(model, N);
  SolverStats stats;

  Stopwatch sw;
  const SynthesisResult star = solve_nominal(truth.truth_column, truth.y0, cfg.polytope, cfg.noise, cfg.weights, opts);
  stats.add(star);
  summary.timings["nominal_synthesis"] = sw.seconds();
  json res;
  res["J_star"] = num(star.status == SynthesisStatus::Optimal ? star.j_inner : kInf);
  res["nominal"] = synthesis_json(star);

  sw = Stopwatch();
  const SignalTrajectory hist_u = gaussian_signal(derive_seed(seed, stream_tag("historical_input")), m, cfg.data.T,
                                                  cfg.data.input_std);
  const SignalTrajectory recent_u = gaussian_signal(derive_seed(seed, stream_tag("recent_input")), m, cfg.data.T_ini,
                                                    cfg.data.input_std);
  const CollectedData data = collect_data(model, cfg.data, N, hist_u, recent_u, recent_start_reaching(model, recent_u),
                                          derive_seed(seed, stream_tag("data_noise")));
  EstimateBundle bundle = estimate(data, cfg.data.estimator, cfg.data.noise_variance);
  res["estimation"] = json{{"eps2", num(bundle.eps2)}, {"eps_inf", num(bundle.eps_inf)}};

  const double eps = cfg.safe_trajectories.eps;
  if (eps > 0.0) {
    Rng rng(derive_seed(seed, stream_tag("perturbation")));
    bundle.g_column -= random_toeplitz_perturbation(rng, p, m, N, eps);
    bundle.y0_hat -= random_vector_perturbation(rng, p * N, eps);
    bundle = assess_errors(bundle, truth);
    bundle.eps2 = std::max(bundle.eps2, eps);
    bundle.eps_inf = std::max(bundle.eps_inf, eps);
  }
  res["bounds"] = json{{"eps2", num(bundle.eps2)}, {"eps_inf", num(bundle.eps_inf)}};
  summary.timings["estimation"] = sw.seconds();

  sw = Stopwatch();
  const SynthesisResult robust = search_hyperparams(bundle, cfg.polytope, cfg.noise, cfg.weights, cfg.search, opts);
  stats.add(robust);
  summary.timings["robust_synthesis"] = sw.seconds();
  json rob = synthesis_json(robust);

  sw = Stopwatch();
  csv::Table table = trajectory_table(p, m);
  NoiseSpec noise = cfg.noise;
  noise.seed = derive_seed(seed, stream_tag("rollouts"));
  const int rollouts = cfg.safe_trajectories.rollouts;
  RunStatus status = worst(status_of(star.status), status_of(robust.status));
  if (star.status == SynthesisStatus::Optimal) {
    res["nominal"]["J_true"] = num(true_cost(star.controller, truth, cfg.weights, p));
    res["nominal"]["rollouts"] = add_rollouts(table, "nominal", model, star.controller, noise, rollouts, cfg.polytope).to_json();
  }
  if (robust.status == SynthesisStatus::Optimal) {
    const double J_hat = true_cost(robust.controller, truth, cfg.weights, p);
    rob["J_hat"] = num(J_hat);
    if (star.status == SynthesisStatus::Optimal) {
      const double J2 = star.j_inner * star.j_inner;
      res["gap"] = num((J_hat * J_hat - J2) / J2);
    }
    rob["rollouts"] = add_rollouts(table, "robust", model, robust.controller, noise, rollouts, cfg.polytope).to_json();
  }
  res["robust"] = rob;
  summary.timings["rollouts"] = sw.seconds();
  out.emit("trajectories.csv", table);
  summary.results = res;
  summary.solver = json{{"solves", stats.solves}, {"iterations", stats.iterations}};
  return status;
}

RunStatus run_s_curve(const ExperimentConfig& cfg, const SynthesisOptions& opts, Emitter& out, RunSummary& summary) {
  const StateSpaceModel model = cfg.model.build();
  const OracleErrors truth = truth_of(model, cfg.horizon);
  const EstimateBundle bundle = bundle_from(truth.truth_column, truth.y0, model.p());
  Stopwatch sw;
  std::vector<SPoint> pts;
  try {
    pts = suboptimality_gap_S(truth, bundle, cfg.polytope, cfg.noise, cfg.weights, cfg.s_curve.eps_inf_grid, opts);
  } catch (const std::invalid_argument& e) {
    summary.results = json{{"error", e.what()}};
    return RunStatus::Infeasible;
  }
  summary.timings["sweep"] = sw.seconds();
  csv::Table table({"eps_inf", "S", "feasible"});
  int transitions = 0;
  json last_finite = nullptr, first_infinite = nullptr;
  double max_finite = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    table.add_row({format_double(pts[i].eps_inf), format_double(pts[i].S), pts[i].feasible ? "1" : "0"});
    if (pts[i].feasible) {
      last_finite = pts[i].eps_inf;
      max_finite = std::max(max_finite, pts[i].S);
    } else if (first_infinite.is_null()) {
      first_infinite = pts[i].eps_inf;
    }
    if (i > 0 && pts[i - 1].feasible && !pts[i].feasible) ++transitions;
  }
  out.emit("s_curve.csv", table);
  summary.results = json{{"points", pts.size()},
                         {"finite_to_infinite_transitions", transitions},
                         {"last_finite_eps_inf", last_finite},
                         {"first_infinite_eps_inf", first_infinite},
                         {"max_finite_S", max_finite}};
  summary.solver = json{{"solves", static_cast<int>(pts.size()) + 1}};
  return RunStatus::Ok;
}

RunStatus run_estimator_compare(const ExperimentConfig& cfg, std::uint64_t seed, int threads, Emitter& out,
                                RunSummary& summary) {
  const StateSpaceModel model = cfg.model.build();
  const int N = cfg.horizon, m = model.m(), n = model.n();
  const auto& ec = cfg.estimator_compare;
  const SignalTrajectory hist_u = gaussian_signal(derive_seed(seed, stream_tag("historical_input")), m, cfg.data.T,
                                                  cfg.data.input_std);
  const SignalTrajectory recent_u = gaussian_signal(derive_seed(seed, stream_tag("recent_input")), m, cfg.data.T_ini,
                                                    cfg.data.input_std);
  const std::uint64_t draw_master = derive_seed(seed, stream_tag("draw"));
  const std::size_t S = ec.sigma_grid.size(), D = static_cast<std::size_t>(ec.draws);

  struct DrawErrors {
    bool ok = false;
    double ls2 = 0, lsi = 0, ml2 = 0, mli = 0;
  };
  std::vector<DrawErrors> errs(S * D);
  Stopwatch sw;
  parallel_for(static_cast<int>(S * D), threads, [&](int idx) {
    const std::size_t i = static_cast<std::size_t>(idx) / D;
    const std::uint64_t draw_seed = derive_seed(draw_master, static_cast<std::uint64_t>(idx));
    Rng rng(derive_seed(draw_seed, 0));
    const Vector start = gaussian_vector(rng, n, ec.initial_state_std);
    DataConfig dc = cfg.data;
    dc.noise_variance = ec.sigma_grid[i];
    const CollectedData data = collect_data(model, dc, N, hist_u, recent_u, start, derive_seed(draw_seed, 1));
    DrawErrors& e = errs[static_cast<std::size_t>(idx)];
    try {
      const EstimateBundle ls = estimate(data, Estimator::LeastSquares, dc.noise_variance);
      const EstimateBundle ml = estimate(data, Estimator::MaximumLikelihood, dc.noise_variance);
      e = DrawErrors{true, ls.eps2, ls.eps_inf, ml.eps2, ml.eps_inf};
    } catch (const EstimationError&) {
      e.ok = false;
    }
  });
  summary.timings["draws"] = sw.seconds();

  csv::Table table({"sigma", "estimator", "eps2_p90", "eps_inf_p90"});
  json per_sigma = json::array();
  int failed_total = 0;
  for (std::size_t i = 0; i < S; ++i) {
    std::vector<double> ls2, lsi, ml2, mli;
    int failed = 0;
    for (std::size_t k = 0; k < D; ++k) {
      const DrawErrors& e = errs[i * D + k];
      if (!e.ok) {
        ++failed;
        continue;
      }
      ls2.push_back(e.ls2);
      lsi.push_back(e.lsi);
      ml2.push_back(e.ml2);
      mli.push_back(e.mli);
    }
    failed_total += failed;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double a = ls2.empty() ? nan : percentile(ls2, 90.0), b = lsi.empty() ? nan : percentile(lsi, 90.0);
    const double c = ml2.empty() ? nan : percentile(ml2, 90.0), d = mli.empty() ? nan : percentile(mli, 90.0);
    const std::string sigma = format_double(ec.sigma_grid[i]);
    table.add_row({sigma, "ls", format_double(a), format_double(b)});
    table.add_row({sigma, "ml", format_double(c), format_double(d)});
    per_sigma.push_back(json{{"sigma", ec.sigma_grid[i]},
                             {"ls", {{"eps2_p90", num(a)}, {"eps_inf_p90", num(b)}}},
                             {"ml", {{"eps2_p90", num(c)}, {"eps_inf_p90", num(d)}}},
                             {"ml_not_worse", c <= a && d <= b},
                             {"failed_draws", failed}});
  }
  out.emit("estimator_errors.csv", table);
  summary.results = json{{"per_sigma", per_sigma}, {"failed_draws", failed_total}};
  return RunStatus::Ok;
}

RunStatus run_subopt_scaling(const ExperimentConfig& cfg, std::uint64_t seed, int threads,
                             const SynthesisOptions& base_opts, Emitter& out, RunSummary& summary) {
  const auto& sc = cfg.subopt_scaling;
  const int N = cfg.horizon;
  const StateSpaceModel probe = cfg.model.build();
  const int p = probe.p(), m = probe.m();
  SynthesisOptions opts = base_opts;
  opts.threads = 1;

  // One perturbation direction per seed, rescaled along the eps2 grid.
  Rng rng(derive_seed(seed, stream_tag("perturbation")));
  const Matrix dir_G = random_toeplitz_perturbation(rng, p, m, N, 1.0);
  const Vector dir_y = random_vector_perturbation(rng, p * N, 1.0);

  struct RhoData {
    OracleErrors truth;
    SynthesisResult star;
  };
  const std::size_t R = sc.rho_grid.size(), E = sc.eps2_grid.size();
  std::vector<RhoData> rhos(R);
  Stopwatch sw;
  parallel_for(static_cast<int>(R), threads, [&](int i) {
    const StateSpaceModel model = cfg.model.build(sc.rho_grid[i]);
    rhos[i].truth = truth_of(model, N);
    rhos[i].star = solve_nominal(rhos[i].truth.truth_column, rhos[i].truth.y0, cfg.polytope, cfg.noise, cfg.weights,
                                 opts);
  });
  summary.timings["nominal"] = sw.seconds();

  struct Point {
    SynthesisResult syn;
    double gap = kInf;
    BoundTerms bound;
    std::string status = "ok";
  };
  std::vector<Point> pts(R * E);
  sw = Stopwatch();
  parallel_for(static_cast<int>(R * E), threads, [&](int idx) {
    const std::size_t i = static_cast<std::size_t>(idx) / E, k = static_cast<std::size_t>(idx) % E;
    const RhoData& rd = rhos[i];
    Point& pt = pts[static_cast<std::size_t>(idx)];
    if (rd.star.status != SynthesisStatus::Optimal) {
      pt.status = std::string("nominal_") + to_string(rd.star.status);
      return;
    }
    const double e2 = sc.eps2_grid[k];
    EstimateBundle b = bundle_from(rd.truth.truth_column - e2 * dir_G, rd.truth.y0 - e2 * dir_y, p);
    b.eps2 = e2;
    b.eps_inf = e2;
    try {
      pt.syn = search_hyperparams(b, cfg.polytope, cfg.noise, cfg.weights, cfg.search, opts);
    } catch (const std::exception& e) {
      pt.status = std::string("error: ") + e.what();
      pt.syn.status = SynthesisStatus::SolverFailure;
      return;
    }
    if (pt.syn.status != SynthesisStatus::Optimal) {
      pt.status = to_string(pt.syn.status);
      return;
    }
    const double J2 = rd.star.j_inner * rd.star.j_inner;
    const double J_hat = true_cost(pt.syn.controller, rd.truth, cfg.weights, p);
    pt.gap = (J_hat * J_hat - J2) / J2;

    const PhiStarNorms phi{spectral_norm(rd.star.maps_hat.uy), inf_norm(rd.star.maps_hat.uy)};
    BoundInputs in;
    in.phi_star = phi;
    in.eps2 = e2;
    in.eps_inf = b.eps_inf;
    in.alpha = pt.syn.hyper.alpha;
    in.G_hat_norm2 = spectral_norm(toeplitz_expand(ToeplitzOperator(b.g_column, p)));
    in.y0_hat_norm2 = b.y0_hat.norm();
    in.G_norm2 = spectral_norm(toeplitz_expand(ToeplitzOperator(rd.truth.truth_column, p)));
    in.y0_norm2 = rd.truth.y0.norm();
    in.S_eps = kInf;
    if (b.eps_inf * phi.norm_inf < 0.5) {
      const OracleResult o = solve_tightened_oracle(rd.truth, b, cfg.polytope, cfg.noise, cfg.weights, phi, opts);
      if (o.status == SynthesisStatus::Optimal) {
        const double Jc = cost_j(o.maps, rd.truth.y0, cfg.weights);
        in.S_eps = std::max(0.0, (Jc * Jc - J2) / J2);
        in.phi_c_norm2 = spectral_norm(o.maps.uy);
      }
    }
    pt.bound = theoretical_bound(in);
  });
  summary.timings["sweep"] = sw.seconds();

  csv::Table table({"rho", "eps2", "gap", "bound_value", "certified", "status"});
  json per_rho = json::array();
  SolverStats stats;
  RunStatus status = RunStatus::Ok;
  for (std::size_t i = 0; i < R; ++i) {
    std::vector<double> gaps;
    json points = json::array();
    stats.add(rhos[i].star);
    for (std::size_t k = 0; k < E; ++k) {
      const Point& pt = pts[i * E + k];
      stats.add(pt.syn);
      gaps.push_back(pt.gap);
      table.add_row({format_double(sc.rho_grid[i]), format_double(sc.eps2_grid[k]), format_double(pt.gap),
                     format_double(pt.status == "ok" ? pt.bound.bound_value : kInf), pt.bound.certified ? "1" : "0",
                     pt.status});
      json pj{{"eps2", sc.eps2_grid[k]}, {"status", pt.status}, {"gap", num(pt.gap)}};
      if (pt.status == "ok") {
        pj["hyper"] = to_json(pt.syn.hyper);
        pj["j_robust"] = num(pt.syn.j_robust);
        pj["bound"] = to_json(pt.bound);
      } else if (pt.status.find("failure") != std::string::npos || pt.status.rfind("error", 0) == 0) {
        status = worst(status, RunStatus::SolverFailure);
      }
      points.push_back(pj);
    }
    const std::optional<double> slope = loglog_slope(sc.eps2_grid, gaps);
    per_rho.push_back(json{{"rho", sc.rho_grid[i]},
                           {"J_star", num(rhos[i].star.j_inner)},
                           {"loglog_slope", slope ? json(*slope) : json(nullptr)},
                           {"points", points}});
  }
  out.emit("subopt.csv", table);
  summary.results = json{{"per_rho", per_rho}};
  summary.solver = json{{"solves", stats.solves}, {"iterations", stats.iterations}};
  return status;
}

RunStatus run_custom(const ExperimentConfig& cfg, std::uint64_t seed, const SynthesisOptions& opts, Emitter& out,
                     RunSummary& summary) {
  const StateSpaceModel model = cfg.model.build();
  const int N = cfg.horizon, p = model.p(), m = model.m();
  const OracleErrors truth = truth_of(model, N);
  Stopwatch sw;
  const SignalTrajectory hist_u = gaussian_signal(derive_seed(seed, stream_tag("historical_input")), m, cfg.data.T,
                                                  cfg.data.input_std);
  const SignalTrajectory recent_u = gaussian_signal(derive_seed(seed, stream_tag("recent_input")), m, cfg.data.T_ini,
                                                    cfg.data.input_std);
  const CollectedData data = collect_data(model, cfg.data, N, hist_u, recent_u, recent_start_reaching(model, recent_u),
                                          derive_seed(seed, stream_tag("data_noise")));
  const EstimateBundle bundle = estimate(data, cfg.data.estimator, cfg.data.noise_variance);
  summary.timings["estimation"] = sw.seconds();
  sw = Stopwatch();
  const SynthesisResult r = search_hyperparams(bundle, cfg.polytope, cfg.noise, cfg.weights, cfg.search, opts);
  summary.timings["synthesis"] = sw.seconds();
  json res{{"estimation", {{"eps2", num(bundle.eps2)}, {"eps_inf", num(bundle.eps_inf)}}}, {"synthesis", to_json(r)}};
  csv::Table table = trajectory_table(p, m);
  if (r.status == SynthesisStatus::Optimal) {
    res["J_hat"] = num(true_cost(r.controller, truth, cfg.weights, p));
    NoiseSpec noise = cfg.noise;
    noise.seed = derive_seed(seed, stream_tag("rollouts"));
    res["rollouts"] =
        add_rollouts(table, "robust", model, r.controller, noise, cfg.safe_trajectories.rollouts, cfg.polytope).to_json();
  }
  out.emit("trajectories.csv", table);
  summary.results = res;
  summary.solver = json{{"solves", r.solves}, {"iterations", r.solver_iterations}};
  return status_of(r.status);
}

}  // namespace

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Ok:
      return "ok";
    case RunStatus::Infeasible:
      return "infeasible";
    case RunStatus::SolverFailure:
      return "solver_failure";
  }
  return "unknown";
}

int exit_code(RunStatus status) {
  switch (status) {
    case RunStatus::Ok:
      return 0;
    case RunStatus::Infeasible:
      return 3;
    case RunStatus::SolverFailure:
      return 4;
  }
  return 4;
}

std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("git_blob_hash: SHA-1 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::uint64_t stream_tag(const std::string& name) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

CollectedData collect_data(const StateSpaceModel& model, const DataConfig& data, int horizon,
                           const SignalTrajectory& historical_u, const SignalTrajectory& recent_u,
                           const Vector& recent_start, std::uint64_t noise_seed) {
  const double sd = std::sqrt(data.noise_variance);
  auto noise = [&](std::uint64_t stream, const SignalTrajectory& u, int p) {
    Rng rng(derive_seed(noise_seed, stream));
    Vector w = gaussian_vector(rng, u.values.size(), sd);
    Vector v = gaussian_vector(rng, static_cast<Eigen::Index>(p) * u.length(), sd);
    return std::make_pair(w, v);
  };
  const int p = model.p();
  CollectedData out;
  StateSpaceModel hist = model;
  hist.x0 = Vector::Zero(model.n());
  const auto [wh, vh] = noise(1, historical_u, p);
  out.record.historical_u = historical_u;
  out.record.historical_y = simulate_open_loop(hist, historical_u, wh, vh).outputs;

  StateSpaceModel rec = model;
  rec.x0 = recent_start;
  const auto [wr, vr] = noise(2, recent_u, p);
  const OpenLoopResult r = simulate_open_loop(rec, recent_u, wr, vr);
  out.record.recent_u = recent_u;
  out.record.recent_y = r.outputs;
  out.record.T_ini = recent_u.length();
  out.record.N = horizon;

  Vector x = recent_start;
  for (int t = 0; t < recent_u.length(); ++t) {
    x = model.A * x + model.B * (recent_u.at(t) + wr.segment(static_cast<Eigen::Index>(t) * model.m(), model.m()));
  }
  StateSpaceModel now = model;
  now.x0 = x;
  out.truth = OracleErrors{true_impulse_response(model, horizon), true_free_response(now, horizon)};
  return out;
}

Vector recent_start_reaching(const StateSpaceModel& model, const SignalTrajectory& recent_u) {
  // x0 = A^T x_s + sum_k A^(T-1-k) B u_k.
  Vector forced = Vector::Zero(model.n());
  Matrix AT = Matrix::Identity(model.n(), model.n());
  for (int t = 0; t < recent_u.length(); ++t) {
    forced = model.A * forced + model.B * recent_u.at(t);
    AT = model.A * AT;
  }
  const Eigen::FullPivLU<Matrix> lu(AT);
  if (!lu.isInvertible()) throw std::invalid_argument("recent_start_reaching: A must be invertible");
  return lu.solve(model.x0 - forced);
}

Matrix random_toeplitz_perturbation(Rng& rng, int p, int m, int N, double eps) {
  Matrix col = Matrix::Zero(static_cast<Eigen::Index>(p) * N, m);
  for (int k = 1; k < N; ++k) {
    col.block(static_cast<Eigen::Index>(k) * p, 0, p, m) =
        Eigen::Map<const Matrix>(gaussian_vector(rng, static_cast<Eigen::Index>(p) * m).data(), p, m);
  }
  if (N < 2 || eps == 0.0) return Matrix::Zero(col.rows(), col.cols());
  const Matrix T = toeplitz_expand(ToeplitzOperator(col, p));
  return col * (eps / std::max(spectral_norm(T), inf_norm(T)));
}

Vector random_vector_perturbation(Rng& rng, Eigen::Index n, double eps) {
  const Vector v = gaussian_vector(rng, n);
  if (eps == 0.0) return Vector::Zero(n);
  return v * (eps / std::max(v.norm(), v.lpNorm<Eigen::Infinity>()));
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

nlohmann::json RunSummary::to_json() const {
  json files_json = json::array();
  for (const auto& f : files) files_json.push_back(json{{"name", f.name}, {"rows", f.rows}, {"hash", f.hash}});
  return json{{"status", expcli::to_string(status)}, {"output_dir", output_dir}, {"config", config},
              {"results", results}, {"timings", timings}, {"solver", solver}, {"files", files_json}};
}

RunSummary run(const ExperimentConfig& config, const RunOptions& options) {
  RunSummary summary;
  const std::uint64_t seed = options.seed.value_or(config.seed);
  const int threads = options.threads.value_or(config.threads);
  if (threads < 1) throw std::invalid_argument("run: threads must be >= 1");
  summary.output_dir = options.output_dir.value_or(config.output_dir);
  summary.config = config.source;
  summary.config["seed"] = seed;
  summary.config["threads"] = threads;
  summary.config["output_dir"] = summary.output_dir;

  SynthesisOptions opts;
  opts.solver = config.solver;
  opts.threads = threads;
  // Search points draw from a seed tied to the run seed.
  ExperimentConfig cfg = config;
  if (auto* grid = std::get_if<GridRandom>(&cfg.search)) grid->seed = derive_seed(seed, stream_tag("search"));

  Emitter out(summary.output_dir, options.write_files);
  Stopwatch total;
  switch (cfg.kind) {
    case ExperimentKind::SafeTrajectories:
      summary.status = run_safe_trajectories(cfg, seed, opts, out, summary);
      break;
    case ExperimentKind::SCurve:
      summary.status = run_s_curve(cfg, opts, out, summary);
      break;
    case ExperimentKind::EstimatorCompare:
      summary.status = run_estimator_compare(cfg, seed, threads, out, summary);
      break;
    case ExperimentKind::SuboptScaling:
      summary.status = run_subopt_scaling(cfg, seed, threads, opts, out, summary);
      break;
    case ExperimentKind::Custom:
      summary.status = run_custom(cfg, seed, opts, out, summary);
      break;
  }
  summary.timings["total"] = total.seconds();
  summary.files = out.files_;
  if (options.write_files) out.write_text("summary.json", summary.to_json().dump(2) + "\n");
  return summary;
}

}  // namespace safebiop::expcli
