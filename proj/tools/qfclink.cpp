// Copyright 2026 The qfclink Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qfclink/config.hpp"
#include "qfclink/scenario.hpp"
#include "qfclink/version.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out = "qfclink_out";
  std::uint64_t seed = 0;
  bool exact = false;
  double duration = 0.0;
  bool export_tags = false;
};

void add_run_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("config", f.config, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Master seed, overrides [run] seed");
  cmd->add_flag("--exact", f.exact, "Use expectation values instead of sampling");
  cmd->add_option("--duration", f.duration, "Seconds per projection setting, overrides the config")
      ->check(CLI::PositiveNumber);
}

qfclink::RunFlags to_flags(const CLI::App* cmd, const CommonFlags& f) {
  qfclink::RunFlags flags;
  if (cmd->count("--seed")) flags.seed = f.seed;
  if (f.exact) flags.exact = true;
  if (cmd->count("--duration")) flags.duration_s = f.duration;
  flags.out_dir = f.out;
  flags.export_tags = f.export_tags;
  return flags;
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

int report_status(const qfclink::RunReport& report) {
  for (const auto& f : report.failures()) std::cerr << "grid point failed: " << f << '\n';
  return report.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Telecom quantum photonic interface simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "Simulate every grid point and write the report");
  add_run_flags(run, run_flags);
  run->add_flag("--export-tags", run_flags.export_tags, "Also write raw time tags per setting");

  CommonFlags fig_flags;
  std::string which = "all";
  auto* figure = app.add_subcommand("figure", "Run the scenario and write plot data");
  figure->add_option("which", which, "wavepacket, sbr_vs_window, efficiency_vs_pump, fidelity_sbr_grid, cluster, rates or all")
      ->required();
  add_run_flags(figure, fig_flags);

  std::string check_path;
  auto* validate = app.add_subcommand("validate-config", "Parse a config and report problems");
  validate->add_option("config", check_path, "Experiment config (INI)")->required();
  bool show_schema = false;
  validate->add_flag("--schema", show_schema, "Print the accepted keys");

  auto* version = app.add_subcommand("version", "Print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*version) {
      std::cout << "qfclink " << qfclink::kVersion << '\n';
      return 0;
    }
    if (*validate) {
      if (show_schema) std::cout << qfclink::config_schema();
      const auto cfg = qfclink::load_config(check_path);
      std::cout << check_path << ": ok (" << cfg.setups.size() * cfg.pump_powers_mW.size() << " grid points)\n";
      return 0;
    }
    if (*run) {
      const auto report = qfclink::run_scenario(run_flags.config, to_flags(run, run_flags), log_line);
      std::cerr << "wrote " << run_flags.out << "/report.csv\n";
      return report_status(report);
    }
    if (*figure) {
      const auto report = qfclink::run_scenario(fig_flags.config, to_flags(figure, fig_flags), log_line);
      for (const auto& path : qfclink::emit_figure_data(report, which, fig_flags.out + "/figures")) {
        std::cerr << "wrote " << path << '\n';
      }
      return report_status(report);
    }
  } catch (const qfclink::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
