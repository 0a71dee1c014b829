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
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfclink/coupling_optimizer.hpp"
#include "qfclink/link_model.hpp"

namespace qfclink {

/// Config file problem; the message names the line or the [section] key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-arm settings applied after the setup's chain has been built.
struct ArmOverrides {
  std::optional<double> detection_transmission;
  std::optional<double> detector_efficiency;
  std::optional<double> dark_rate;
};

struct ScenarioConfig {
  std::vector<Setup> setups{Setup::A, Setup::B, Setup::C, Setup::D};
  LinkOverrides link;
  ArmOverrides arm_A;
  ArmOverrides arm_B;
  TomographySettings tomography;
  std::vector<double> pump_powers_mW{5.0, 10.0, 15.0, 20.0};
  std::vector<double> windows_tau{1.5, 5.0};
  double duration_per_setting_s = 30.0;
  /// Per-setup acquisition time per setting; count-starved setups need more.
  std::map<Setup, double> setup_duration_s;
  std::uint64_t seed = 1;
  bool exact = false;
  int parallelism = 1;
  /// Unset: the per-setup default (once for a/b, 60 min for c/d).
  std::optional<double> calibration_cadence_min;
  double drift_rad_per_sqrt_min = 0.0;
  /// Offset between pump interferometer phase and state phase.
  std::optional<double> interferometer_phase_rad;
  double interferometer_offset_rad = 0.0;
  std::optional<CouplingProblem> coupling;

  /// Full experiment description for one grid point.
  ExperimentConfig experiment(Setup setup, double pump_power_mW) const;
  double duration_s(Setup setup) const;
  void validate() const;
};

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);

/// Human-readable schema of the config format.
std::string config_schema();

}  // namespace qfclink
