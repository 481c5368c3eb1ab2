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

#include <nlohmann/json.hpp>

#include <cmath>
#include <string>

#include "../tools/expcli/config.hpp"
#include "../tools/expcli/presets.hpp"
#include "../tools/expcli/run.hpp"
#include "safebiop/plant.hpp"
#include "safebiop/random.hpp"

using namespace safebiop;
using namespace safebiop::expcli;
using nlohmann::json;

namespace {

json preset(const std::string& name) {
  const auto text = find_preset(name);
  REQUIRE(text.has_value());
  return json::parse(*text);
}

std::string error_path(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<none>";
}

std::string error_message(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("embedded presets parse") {
  REQUIRE(embedded_presets().size() >= 4);
  for (const Preset& p : embedded_presets()) {
    CAPTURE(p.name);
    CHECK_NOTHROW(parse_config(json::parse(p.json)));
  }
  CHECK_FALSE(find_preset("nope").has_value());
  const ExperimentConfig c = parse_config(preset("fig1a"));
  CHECK(c.kind == ExperimentKind::SafeTrajectories);
  CHECK(c.horizon == 12);
  CHECK(c.polytope.y_steps.size() == 11);
}

TEST_CASE("config errors carry a path") {
  json doc = preset("fig1b");
  doc["bogus"] = 1;
  CHECK(error_path(doc) == "bogus");

  doc = preset("fig1b");
  doc["horizon"] = -3;
  CHECK(error_path(doc) == "horizon");

  doc = preset("fig1a");
  doc["data"]["estimator"] = "mle";
  CHECK(error_path(doc) == "data.estimator");
  CHECK(error_message(doc).find("allowed: ls, ml") != std::string::npos);

  doc = preset("fig1b");
  doc["polytope"]["y_steps"] = {1, 40};
  CHECK(error_path(doc).rfind("polytope.y_steps", 0) == 0);

  doc = preset("fig1a");
  doc["data"]["T"] = 10;
  CHECK(error_path(doc) == "data.T");

  doc = preset("fig1b");
  doc.erase("s_curve");
  CHECK(error_path(doc) == "s_curve");
}

TEST_CASE("git blob hash") {
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("stream tags are distinct") {
  CHECK(stream_tag("draw") != stream_tag("search"));
  CHECK(stream_tag("draw") == stream_tag("draw"));
}

TEST_CASE("log-log slope") {
  CHECK(*loglog_slope({1, 10, 100}, {2, 20, 200}) == doctest::Approx(1.0));
  CHECK(*loglog_slope({1, 2, 4}, {1, 4, 16}) == doctest::Approx(2.0));
  CHECK_FALSE(loglog_slope({1}, {1}).has_value());
  CHECK_FALSE(loglog_slope({1, 2}, {0, 0}).has_value());
}

TEST_CASE("perturbations have the requested size") {
  Rng rng(3);
  const Matrix d = random_toeplitz_perturbation(rng, 1, 1, 6, 0.05);
  const Matrix D = ToeplitzOperator(d, 1).expand();
  CHECK(std::max(spectral_norm(D), inf_norm(D)) == doctest::Approx(0.05));
  const Vector v = random_vector_perturbation(rng, 6, 0.05);
  CHECK(std::max(v.norm(), v.lpNorm<Eigen::Infinity>()) == doctest::Approx(0.05));
}

TEST_CASE("noiseless data collection recovers the free response") {
  const StateSpaceModel model = benchmark_model(0.9, (Vector(2) << 2, -1).finished());
  Rng rng(11);
  DataConfig data;
  data.T = 60;
  data.T_ini = 4;
  const int N = 5;
  const SignalTrajectory hist(gaussian_vector(rng, data.T), 1);
  const SignalTrajectory recent(gaussian_vector(rng, data.T_ini), 1);
  const Vector start = recent_start_reaching(model, recent);
  const CollectedData c = collect_data(model, data, N, hist, recent, start, 1);
  CHECK((c.truth.y0 - true_free_response(model, N)).norm() < 1e-9);
  CHECK((c.truth.truth_column - true_impulse_response(model, N)).norm() < 1e-12);
  const EstimateBundle e = estimate_ls(partition_data(c.record), c.record);
  CHECK((e.y0_hat - c.truth.y0).norm() < 1e-6);
  CHECK((e.g_column - c.truth.truth_column).norm() < 1e-6);
}

TEST_CASE("small s-curve run is deterministic") {
  json doc = preset("fig1b");
  doc["s_curve"]["eps_inf_grid"] = {0.0, 0.1, 0.5};
  doc["threads"] = 2;
  const ExperimentConfig cfg = parse_config(doc);
  RunOptions opts;
  opts.write_files = false;
  const RunSummary a = run(cfg, opts);
  const RunSummary b = run(cfg, opts);
  REQUIRE(a.status == RunStatus::Ok);
  REQUIRE(a.files.size() == 1);
  CHECK(a.files[0].name == "s_curve.csv");
  CHECK(a.files[0].rows == 3);
  CHECK(a.files[0].hash == b.files[0].hash);
  CHECK(a.results["finite_to_infinite_transitions"] == 1);
  CHECK(a.results["first_infinite_eps_inf"] == 0.5);
  CHECK(exit_code(RunStatus::Infeasible) == 3);
}
