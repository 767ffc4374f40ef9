// Copyright 2026 The lrsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// lrsim command-line tool.
//
//   lrsim run --config FILE [--out-dir DIR] [--jobs N] [--seed S] [--tolerance-scale X]
//   lrsim validate --config FILE
//   lrsim list-examples
//
// Exit codes: 0 all verdicts pass, 1 a verdict failed (reports are still
// written), 2 invalid configuration or runtime model error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "runner.hpp"

#ifndef LRSIM_CONFIG_DIR
#define LRSIM_CONFIG_DIR "configs"
#endif

namespace {

namespace fs = std::filesystem;
using namespace lrsim::cli;

int report_diagnostics(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << "error: " << d.str() << '\n';
  return diags.empty() ? 0 : 2;
}

int do_validate(const std::string& config) {
  const auto diags = validate(config);
  if (diags.empty()) {
    std::cout << config << ": ok\n";
    return 0;
  }
  return report_diagnostics(diags);
}

int do_run(const std::string& config, const std::string& out_dir, const RunOptions& opt) {
  const auto loaded = load_config(config);
  if (!loaded.diagnostics.empty()) return report_diagnostics(loaded.diagnostics);
  RunResult result;
  try {
    result = run_experiment(loaded.config, opt);
    write_reports(out_dir, loaded.config, result);
  } catch (const lrsim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cout << loaded.config.name << " (" << loaded.config.kind << ")\n";
  for (const auto& v : result.verdicts) {
    std::cout << "  [" << (v.pass ? "PASS" : "FAIL") << "] " << v.name << ": " << v.detail << '\n';
  }
  std::cout << "  reports: " << (fs::path(out_dir) / loaded.config.csv).string() << ", "
            << (fs::path(out_dir) / loaded.config.json).string() << '\n';
  return result.passed() ? 0 : 1;
}

int do_list(const std::string& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.path().extension() == ".yaml") files.push_back(entry.path());
  }
  if (ec) {
    std::cerr << "error: cannot list " << dir << '\n';
    return 2;
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto loaded = load_config(f);
    std::cout << f.filename().string() << "  "
              << (loaded.diagnostics.empty() ? loaded.config.kind : std::string("(invalid)")) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lieb-Robinson locality simulator"};
  app.require_subcommand(1);

  std::string config, out_dir = "reports", examples_dir = LRSIM_CONFIG_DIR;
  RunOptions opt;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  auto* run = app.add_subcommand("run", "Run an experiment and write CSV and JSON reports");
  run->add_option("--config", config, "Experiment YAML file")->required();
  run->add_option("--out-dir", out_dir, "Report directory")->capture_default_str();
  run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "Override the configured seed");
  run->add_option("--tolerance-scale", opt.tolerance_scale,
                  "Multiply the integration tolerance")
      ->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "Check a config without running it");
  val->add_option("--config", config, "Experiment YAML file")->required();

  auto* list = app.add_subcommand("list-examples", "List bundled configs");
  list->add_option("--dir", examples_dir, "Config directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  opt.jobs = jobs;
  if (*seed_opt) opt.seed = seed;

  if (*run) return do_run(config, out_dir, opt);
  if (*val) return do_validate(config);
  return do_list(examples_dir);
}
