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


// synth: command-line front end for the experiment runners.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "config.hpp"
#include "presets.hpp"
#include "run.hpp"

namespace {

using safebiop::expcli::ConfigError;

constexpr int kExitConfig = 2;
constexpr int kExitFailure = 4;

/// A path to a JSON file, or "preset:<name>" for an embedded preset.
nlohmann::json load_document(const std::string& source) {
  constexpr std::string_view prefix = "preset:";
  if (source.rfind(prefix, 0) == 0) {
    const std::string name = source.substr(prefix.size());
    const auto text = safebiop::expcli::find_preset(name);
    if (!text) throw ConfigError("$", "no embedded preset named '" + name + "'");
    return nlohmann::json::parse(*text);
  }
  return safebiop::expcli::read_config_file(source);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe data-driven controller synthesis experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "Run an experiment and write its CSVs and summary.json");
  run->add_option("config", config_path, "Config file, or preset:<name>")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--seed", seed, "Master seed (overrides seed)");
  run->add_option("--threads", threads, "Worker threads (overrides threads)")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "Do not print the summary");

  CLI::App* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path, "Config file, or preset:<name>")->required();

  std::string show;
  CLI::App* presets = app.add_subcommand("presets", "List the embedded presets");
  presets->add_option("--show", show, "Print one preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (presets->parsed()) {
    if (!show.empty()) {
      const auto text = safebiop::expcli::find_preset(show);
      if (!text) {
        std::cerr << "error: no embedded preset named '" << show << "'\n";
        return kExitConfig;
      }
      std::cout << *text;
      return 0;
    }
    for (const auto& p : safebiop::expcli::embedded_presets()) std::cout << p.name << "\n";
    return 0;
  }

  safebiop::expcli::ExperimentConfig cfg;
  try {
    cfg = safebiop::expcli::parse_config(load_document(config_path));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: $: " << e.what() << "\n";
    return kExitConfig;
  }

  if (validate->parsed()) {
    std::cout << "ok: " << safebiop::expcli::to_string(cfg.kind) << "\n";
    return 0;
  }

  try {
    safebiop::expcli::RunOptions opts;
    opts.output_dir = out_dir;
    opts.seed = seed;
    opts.threads = threads;
    const safebiop::expcli::RunSummary summary = safebiop::expcli::run(cfg, opts);
    if (!quiet) {
      nlohmann::json brief = summary.to_json();
      brief.erase("config");
      std::cout << brief.dump(2) << "\n";
    }
    return safebiop::expcli::exit_code(summary.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
