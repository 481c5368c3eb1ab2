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


#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace safebiop::expcli {

namespace {

using nlohmann::json;

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "$" : path, "must be an object");
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      std::string list;
      for (const auto& k : allowed) list += (list.empty() ? "" : ", ") + k;
      throw ConfigError(join(path, it.key()), "unknown key (allowed: " + list + ")");
    }
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

long long as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "must be an integer");
  return j.get<long long>();
}

double number_at(const json& obj, const std::string& path, const std::string& key, double fallback,
                 double lo = -std::numeric_limits<double>::infinity(), bool lo_strict = false) {
  if (!obj.contains(key)) return fallback;
  const std::string p = join(path, key);
  const double v = as_number(obj.at(key), p);
  if (lo_strict ? !(v > lo) : !(v >= lo)) {
    std::ostringstream os;
    os << "must be " << (lo_strict ? "> " : ">= ") << lo;
    throw ConfigError(p, os.str());
  }
  return v;
}

int int_at(const json& obj, const std::string& path, const std::string& key, int fallback, int lo) {
  if (!obj.contains(key)) return fallback;
  const std::string p = join(path, key);
  const long long v = as_integer(obj.at(key), p);
  if (v < lo || v > std::numeric_limits<int>::max()) throw ConfigError(p, "must be an integer >= " + std::to_string(lo));
  return static_cast<int>(v);
}

template <typename E>
E enum_at(const json& obj, const std::string& path, const std::string& key,
          const std::vector<std::pair<std::string, E>>& values, E fallback, bool required = false) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) {
    if (required) throw ConfigError(p, "required");
    return fallback;
  }
  std::string list;
  for (const auto& [name, v] : values) list += (list.empty() ? "" : ", ") + name;
  if (!obj.at(key).is_string()) throw ConfigError(p, "must be a string (allowed: " + list + ")");
  const std::string s = obj.at(key).get<std::string>();
  for (const auto& [name, v] : values) {
    if (name == s) return v;
  }
  throw ConfigError(p, "unknown value '" + s + "' (allowed: " + list + ")");
}

std::vector<double> vector_at(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], index_path(path, i)));
  return out;
}

Vector eigen_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

Matrix matrix_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "must be a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(vector_at(j[i], index_path(path, i)));
  const std::size_t cols = rows.front().size();
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ConfigError(index_path(path, i), "rows must have equal length");
    for (std::size_t k = 0; k < cols; ++k) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return M;
}

std::vector<int> steps_at(const json& obj, const std::string& path, const std::string& key, int horizon) {
  if (!obj.contains(key)) return {};
  const std::string p = join(path, key);
  const json& j = obj.at(key);
  if (!j.is_array() || j.empty()) throw ConfigError(p, "must be a non-empty array of time steps");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const long long t = as_integer(j[i], index_path(p, i));
    if (t < 0 || t >= horizon) {
      throw ConfigError(index_path(p, i), "step must lie in [0, horizon) = [0, " + std::to_string(horizon) + ")");
    }
    out.push_back(static_cast<int>(t));
  }
  return out;
}

std::vector<double> grid_at(const json& obj, const std::string& path, const std::string& key, double lo,
                            bool lo_strict) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) throw ConfigError(p, "required");
  const std::vector<double> v = vector_at(obj.at(key), p);
  if (v.empty()) throw ConfigError(p, "must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (lo_strict ? !(v[i] > lo) : !(v[i] >= lo)) {
      throw ConfigError(index_path(p, i), std::string("must be ") + (lo_strict ? "> " : ">= ") + std::to_string(lo));
    }
  }
  return v;
}

ModelConfig parse_model(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"rho", "A", "B", "C", "x0"});
  ModelConfig m;
  if (!j.contains("x0")) throw ConfigError(join(path, "x0"), "required");
  m.x0 = eigen_vector(vector_at(j.at("x0"), join(path, "x0")));
  if (j.contains("rho")) {
    for (const char* k : {"A", "B", "C"}) {
      if (j.contains(k)) throw ConfigError(join(path, k), "not allowed together with rho");
    }
    m.rho = number_at(j, path, "rho", 1.0, 0.0, true);
    if (m.x0.size() != 2) throw ConfigError(join(path, "x0"), "must have 2 entries for the benchmark model");
    return m;
  }
  for (const char* k : {"A", "B", "C"}) {
    if (!j.contains(k)) throw ConfigError(join(path, k), "required when rho is absent");
  }
  m.A = matrix_at(j.at("A"), join(path, "A"));
  m.B = matrix_at(j.at("B"), join(path, "B"));
  m.C = matrix_at(j.at("C"), join(path, "C"));
  try {
    m.build().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return m;
}

SafetyPolytope parse_polytope(const json& j, const std::string& path, int p, int m, int horizon) {
  require_object(j, path);
  check_keys(j, path, {"y_bound", "u_bound", "F_y", "b_y", "F_u", "b_u", "y_steps", "u_steps"});
  SafetyPolytope poly = SafetyPolytope::empty(p, m);
  auto side = [&](const char* bound, const char* F, const char* b, int dim, Matrix& Fo, Vector& bo) {
    if (j.contains(bound)) {
      if (j.contains(F) || j.contains(b)) throw ConfigError(join(path, F), std::string("not allowed together with ") + bound);
      const double v = number_at(j, path, bound, 0.0, 0.0, true);
      Fo.resize(2 * dim, dim);
      Fo << Matrix::Identity(dim, dim), -Matrix::Identity(dim, dim);
      bo = Vector::Constant(2 * dim, v);
    } else if (j.contains(F) || j.contains(b)) {
      if (!j.contains(F)) throw ConfigError(join(path, F), "required together with " + std::string(b));
      if (!j.contains(b)) throw ConfigError(join(path, b), "required together with " + std::string(F));
      Fo = matrix_at(j.at(F), join(path, F));
      bo = eigen_vector(vector_at(j.at(b), join(path, b)));
      if (Fo.cols() != dim) throw ConfigError(join(path, F), "must have " + std::to_string(dim) + " columns");
      if (bo.size() != Fo.rows()) throw ConfigError(join(path, b), "length must equal the number of rows of " + std::string(F));
    }
  };
  side("y_bound", "F_y", "b_y", p, poly.F_y, poly.b_y);
  side("u_bound", "F_u", "b_u", m, poly.F_u, poly.b_u);
  poly.y_steps = steps_at(j, path, "y_steps", horizon);
  poly.u_steps = steps_at(j, path, "u_steps", horizon);
  return poly;
}

NoiseSpec parse_noise(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"w_inf", "v_inf", "distribution", "sigma"});
  NoiseSpec n;
  n.w_inf = number_at(j, path, "w_inf", 1.0, 0.0);
  n.v_inf = number_at(j, path, "v_inf", 1.0, 0.0);
  n.distribution = enum_at<NoiseDistribution>(
      j, path, "distribution",
      {{"uniform", NoiseDistribution::UniformBounded}, {"truncated_gaussian", NoiseDistribution::TruncatedGaussian}},
      NoiseDistribution::UniformBounded);
  n.sigma = number_at(j, path, "sigma", 1.0, 0.0, true);
  return n;
}

std::vector<double> per_step(const json& j, const std::string& path, const std::string& key, double fallback,
                             int horizon, double lo, bool lo_strict) {
  if (!j.contains(key)) return std::vector<double>(static_cast<std::size_t>(horizon), fallback);
  const std::string p = join(path, key);
  if (j.at(key).is_array()) {
    std::vector<double> v = vector_at(j.at(key), p);
    if (static_cast<int>(v.size()) != horizon) throw ConfigError(p, "must have one entry per step (horizon)");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (lo_strict ? !(v[i] > lo) : !(v[i] >= lo)) throw ConfigError(index_path(p, i), "out of range");
    }
    return v;
  }
  return std::vector<double>(static_cast<std::size_t>(horizon), number_at(j, path, key, fallback, lo, lo_strict));
}

CostWeights parse_weights(const json& j, const std::string& path, int p, int m, int horizon) {
  require_object(j, path);
  check_keys(j, path, {"q", "r", "terminal_q"});
  std::vector<double> q = per_step(j, path, "q", 1.0, horizon, 0.0, false);
  const std::vector<double> r = per_step(j, path, "r", 1.0, horizon, 0.0, true);
  if (j.contains("terminal_q")) q.back() = number_at(j, path, "terminal_q", 1.0, 0.0);
  CostWeights w = CostWeights::identity(p, m, horizon);
  for (int t = 0; t < horizon; ++t) {
    w.Q_blocks[t] = q[t] * Matrix::Identity(p, p);
    w.R_blocks[t] = r[t] * Matrix::Identity(m, m);
  }
  return w;
}

DataConfig parse_data(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"T", "T_ini", "input_std", "noise_variance", "estimator"});
  DataConfig d;
  d.T = int_at(j, path, "T", d.T, 1);
  d.T_ini = int_at(j, path, "T_ini", d.T_ini, 1);
  d.input_std = number_at(j, path, "input_std", d.input_std, 0.0, true);
  d.noise_variance = number_at(j, path, "noise_variance", d.noise_variance, 0.0);
  d.estimator = enum_at<Estimator>(j, path, "estimator",
                                   {{"ls", Estimator::LeastSquares}, {"ml", Estimator::MaximumLikelihood}},
                                   Estimator::LeastSquares);
  return d;
}

SearchStrategy parse_search(const json& j, const std::string& path) {
  require_object(j, path);
  enum class Kind { Grid, Golden };
  const Kind kind = enum_at<Kind>(j, path, "strategy", {{"grid_random", Kind::Grid}, {"golden_gamma", Kind::Golden}},
                                  Kind::Grid, true);
  if (kind == Kind::Grid) {
    check_keys(j, path, {"strategy", "n_points", "alpha"});
    GridRandom g;
    g.n_points = int_at(j, path, "n_points", g.n_points, 1);
    if (j.contains("alpha")) g.alpha = number_at(j, path, "alpha", 0.0, 0.0);
    return g;
  }
  check_keys(j, path, {"strategy", "iterations", "tau_grid", "alpha", "alpha_nominal_multiple"});
  GoldenGamma g;
  g.iterations = int_at(j, path, "iterations", g.iterations, 1);
  if (j.contains("tau_grid")) g.tau_grid = grid_at(j, path, "tau_grid", 0.0, false);
  if (j.contains("alpha") && j.contains("alpha_nominal_multiple")) {
    throw ConfigError(join(path, "alpha_nominal_multiple"), "not allowed together with alpha");
  }
  if (j.contains("alpha")) g.alpha = number_at(j, path, "alpha", 0.0, 0.0);
  if (j.contains("alpha_nominal_multiple")) {
    g.alpha_nominal_multiple = number_at(j, path, "alpha_nominal_multiple", 0.0, 0.0, true);
  }
  return g;
}

conic::SolverOptions parse_solver(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path, {"tolerance", "max_iterations", "verbose"});
  conic::SolverOptions o;
  const double tol = number_at(j, path, "tolerance", o.feastol, 0.0, true);
  o.feastol = o.abstol = o.reltol = tol;
  o.max_iterations = int_at(j, path, "max_iterations", o.max_iterations, 1);
  if (j.contains("verbose")) {
    if (!j.at("verbose").is_boolean()) throw ConfigError(join(path, "verbose"), "must be a boolean");
    o.verbose = j.at("verbose").get<bool>();
  }
  return o;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SafeTrajectories:
      return "safe_trajectories";
    case ExperimentKind::SCurve:
      return "s_curve";
    case ExperimentKind::EstimatorCompare:
      return "estimator_compare";
    case ExperimentKind::SuboptScaling:
      return "subopt_scaling";
    case ExperimentKind::Custom:
      return "custom";
  }
  return "unknown";
}

StateSpaceModel ModelConfig::build() const { return build(rho.value_or(1.0)); }

StateSpaceModel ModelConfig::build(double rho_override) const {
  if (rho) return benchmark_model(rho_override, x0);
  StateSpaceModel s{A, B, C, x0};
  return s;
}

ExperimentConfig parse_config(const json& doc) {
  require_object(doc, "");
  check_keys(doc, "", {"experiment", "seed", "threads", "output_dir", "model", "horizon", "polytope", "noise",
                       "weights", "data", "search", "solver", "safe_trajectories", "s_curve", "estimator_compare",
                       "subopt_scaling"});
  ExperimentConfig c;
  c.source = doc;
  c.kind = enum_at<ExperimentKind>(doc, "", "experiment",
                                   {{"safe_trajectories", ExperimentKind::SafeTrajectories},
                                    {"s_curve", ExperimentKind::SCurve},
                                    {"estimator_compare", ExperimentKind::EstimatorCompare},
                                    {"subopt_scaling", ExperimentKind::SuboptScaling},
                                    {"custom", ExperimentKind::Custom}},
                                   ExperimentKind::Custom, true);
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !(doc.at("seed").is_number_integer() && doc.at("seed").get<long long>() >= 0)) {
      throw ConfigError("seed", "must be a non-negative integer");
    }
    c.seed = doc.at("seed").get<std::uint64_t>();
  }
  c.threads = int_at(doc, "", "threads", 1, 1);
  c.output_dir = std::string("out/") + to_string(c.kind);
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string() || doc.at("output_dir").get<std::string>().empty()) {
      throw ConfigError("output_dir", "must be a non-empty string");
    }
    c.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (!doc.contains("model")) throw ConfigError("model", "required");
  c.model = parse_model(doc.at("model"), "model");
  if (!doc.contains("horizon")) throw ConfigError("horizon", "required");
  c.horizon = int_at(doc, "", "horizon", 0, 1);
  const StateSpaceModel plant = c.model.build();
  const int p = plant.p(), m = plant.m();
  c.polytope = doc.contains("polytope") ? parse_polytope(doc.at("polytope"), "polytope", p, m, c.horizon)
                                        : SafetyPolytope::empty(p, m);
  c.noise = doc.contains("noise") ? parse_noise(doc.at("noise"), "noise") : NoiseSpec{1.0, 1.0};
  c.weights = doc.contains("weights") ? parse_weights(doc.at("weights"), "weights", p, m, c.horizon)
                                      : CostWeights::identity(p, m, c.horizon);
  if (doc.contains("data")) c.data = parse_data(doc.at("data"), "data");
  if (doc.contains("search")) c.search = parse_search(doc.at("search"), "search");
  if (doc.contains("solver")) c.solver = parse_solver(doc.at("solver"), "solver");

  if (doc.contains("safe_trajectories")) {
    const json& j = doc.at("safe_trajectories");
    const std::string path = "safe_trajectories";
    require_object(j, path);
    check_keys(j, path, {"eps", "rollouts"});
    c.safe_trajectories.eps = number_at(j, path, "eps", c.safe_trajectories.eps, 0.0);
    c.safe_trajectories.rollouts = int_at(j, path, "rollouts", c.safe_trajectories.rollouts, 1);
  }
  if (doc.contains("s_curve") || c.kind == ExperimentKind::SCurve) {
    const std::string path = "s_curve";
    if (!doc.contains(path)) throw ConfigError(path, "required for this experiment");
    const json& j = doc.at(path);
    require_object(j, path);
    check_keys(j, path, {"eps_inf_grid"});
    c.s_curve.eps_inf_grid = grid_at(j, path, "eps_inf_grid", 0.0, false);
    if (!std::is_sorted(c.s_curve.eps_inf_grid.begin(), c.s_curve.eps_inf_grid.end())) {
      throw ConfigError("s_curve.eps_inf_grid", "must be nondecreasing");
    }
  }
  if (doc.contains("estimator_compare") || c.kind == ExperimentKind::EstimatorCompare) {
    const std::string path = "estimator_compare";
    if (!doc.contains(path)) throw ConfigError(path, "required for this experiment");
    const json& j = doc.at(path);
    require_object(j, path);
    check_keys(j, path, {"sigma_grid", "draws", "initial_state_std"});
    c.estimator_compare.sigma_grid = grid_at(j, path, "sigma_grid", 0.0, true);
    c.estimator_compare.draws = int_at(j, path, "draws", c.estimator_compare.draws, 1);
    c.estimator_compare.initial_state_std =
        number_at(j, path, "initial_state_std", c.estimator_compare.initial_state_std, 0.0);
  }
  if (doc.contains("subopt_scaling") || c.kind == ExperimentKind::SuboptScaling) {
    const std::string path = "subopt_scaling";
    if (!doc.contains(path)) throw ConfigError(path, "required for this experiment");
    const json& j = doc.at(path);
    require_object(j, path);
    check_keys(j, path, {"rho_grid", "eps2_grid"});
    c.subopt_scaling.rho_grid = grid_at(j, path, "rho_grid", 0.0, true);
    c.subopt_scaling.eps2_grid = grid_at(j, path, "eps2_grid", 0.0, true);
    if (!c.model.rho) throw ConfigError("subopt_scaling.rho_grid", "requires the benchmark model (model.rho)");
  }

  // Cross-field checks.
  const bool uses_data = c.kind == ExperimentKind::SafeTrajectories || c.kind == ExperimentKind::EstimatorCompare ||
                         c.kind == ExperimentKind::Custom;
  if (uses_data) {
    const int need = (m + 1) * (plant.n() + c.data.T_ini + c.horizon) - 1;
    if (c.data.T < need) {
      throw ConfigError("data.T", "must be >= (m+1)(n+T_ini+horizon)-1 = " + std::to_string(need));
    }
  }
  const bool robust = c.kind == ExperimentKind::SafeTrajectories || c.kind == ExperimentKind::SuboptScaling ||
                      c.kind == ExperimentKind::Custom;
  if (robust) {
    for (const auto& R : c.weights.R_blocks) {
      if (R(0, 0) != c.weights.R_blocks.front()(0, 0)) {
        throw ConfigError("weights.r", "robust synthesis needs the same r at every step");
      }
    }
  }
  return c;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("$", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace safebiop::expcli
