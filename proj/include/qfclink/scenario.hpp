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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qfclink/config.hpp"
#include "qfclink/coupling_optimizer.hpp"
#include "qfclink/event_simulator.hpp"
#include "qfclink/tomography.hpp"

namespace qfclink {

/// Command-line overrides of the config's [run] section.
struct RunFlags {
  std::optional<std::uint64_t> seed;
  std::optional<bool> exact;
  std::optional<double> duration_s;
  std::string out_dir;  // empty: nothing is written
  bool export_tags = false;
};

enum class Provenance { Simulated, Expected, Analytic };
std::string_view provenance_name(Provenance p);

struct ArmCalibration {
  Unitary2 estimate = Unitary2::identity();
  Unitary2 truth = Unitary2::identity();
  double unitary_fidelity = 1.0;
  bool low_purity_warning = false;
  double minute = 0.0;
};

struct WindowResult {
  double window_tau = 0.0;
  double window_ns = 0.0;
  CountsTable counts;
  DensityMatrix rho = DensityMatrix::maximally_mixed(4);
  DensityMatrix rho_bg_corrected = DensityMatrix::maximally_mixed(4);
  int mle_iterations = 0;
  double fidelity = 0.0;
  double fidelity_sigma = 0.0;
  double fidelity_bg_corrected = 0.0;
  double purity = 0.0;
  double purity_sigma = 0.0;
  SbrEstimate sbr;
  double sbr_analytic = 0.0;
  /// Ceiling for a perfect channel at the analytic SBR.
  double fidelity_ceiling = 0.0;
  double coincidence_rate = 0.0;
  double coincidence_rate_sigma = 0.0;
  double coincidence_rate_expected = 0.0;
};

/// Delay histogram summed over all settings of one grid point; expectation
/// values in exact mode.
struct DelayHistogram {
  double bin_ns = 1.0;
  double range_ns = 0.0;
  std::vector<double> counts;
};

/// Signal/background summed over the HV-basis settings for a dense list of
/// windows.
struct WindowScanRow {
  double window_tau = 0.0;
  double signal = 0.0;
  double background = 0.0;
  double sbr_analytic = 0.0;
};

struct GridPointResult {
  Setup setup = Setup::A;
  double pump_mW = 0.0;
  bool ok = false;
  std::string error;
  std::vector<WindowResult> windows;
  std::vector<ArmCalibration> calibrations_A;
  ArmCalibration calibration_B;
  DelayHistogram delays;
  std::vector<WindowScanRow> window_scan;
  nlohmann::json chain;
  double duration_per_setting_s = 0.0;
  bool exact = false;
};

struct RunReport {
  std::vector<GridPointResult> points;
  std::optional<CouplingResult> coupling;
  std::optional<CouplingProblem> coupling_problem;
  SourceParams source;
  ConverterParams converter;

  bool ok() const;
  std::vector<std::string> failures() const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// simulate -> counts -> calibrate -> MLE -> errors -> SBR for every
/// (setup, pump power) of the config, then the coupling optimization when
/// configured. Grid points run on up to `parallelism` threads and are
/// deterministic for given (config, seed, flags). Failures are recorded per
/// point rather than thrown. With flags.out_dir set, every artifact is written
/// atomically.
RunReport run_scenario(const ScenarioConfig& config, const RunFlags& flags, const ProgressFn& progress = {});
RunReport run_scenario(const std::string& config_path, const RunFlags& flags, const ProgressFn& progress = {});

/// Single grid point, exposed for tests.
GridPointResult run_grid_point(const ScenarioConfig& config, Setup setup, double pump_mW, bool exact,
                               double duration_s, std::uint64_t seed, int threads = 1,
                               const std::string& tags_dir = {});

/// Long-form table: setup,pump_mw,window_tau,quantity,value,sigma,provenance.
void write_report_csv(std::ostream& out, const RunReport& report);
nlohmann::json report_json(const RunReport& report);

inline constexpr std::string_view kFigureNames[] = {"wavepacket", "sbr_vs_window", "efficiency_vs_pump",
                                                    "fidelity_sbr_grid", "cluster", "rates"};

/// Writes <out_dir>/<which>.csv; `which` may be "all". Throws
/// std::invalid_argument for an unknown figure and std::runtime_error when the
/// report lacks the runs the figure needs. Returns the files written.
std::vector<std::string> emit_figure_data(const RunReport& report, const std::string& which,
                                          const std::string& out_dir);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace qfclink
