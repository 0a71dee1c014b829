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


#include <gtest/gtest.h>

#include <numbers>
#include <sstream>
#include <string>

#include "qfclink/config.hpp"

using namespace qfclink;

namespace {

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const std::string kSource = QFCLINK_SOURCE_DIR;

}  // namespace

TEST(Config, ShippedDefault) {
  const ScenarioConfig c = load_config(kSource + "/configs/default.ini");
  EXPECT_EQ(c.setups.size(), 4u);
  EXPECT_EQ(c.pump_powers_mW, (std::vector<double>{5.0, 10.0, 15.0, 20.0}));
  EXPECT_EQ(c.windows_tau, (std::vector<double>{1.5, 5.0}));
  EXPECT_EQ(c.duration_s(qfclink::Setup::A), 30.0);
  EXPECT_EQ(c.duration_s(qfclink::Setup::D), 600.0);
  EXPECT_FALSE(c.exact);
  EXPECT_FALSE(c.coupling.has_value());
  const ExperimentConfig d = c.experiment(qfclink::Setup::D, 20.0);
  EXPECT_EQ(d.duration_per_setting_s, 600.0);
  EXPECT_EQ(d.source.pump_power_mW, 20.0);
  EXPECT_EQ(d.calibration_cadence_min, 60.0);
}

TEST(Config, ShippedCoupling) {
  const ScenarioConfig c = load_config(kSource + "/configs/coupling.ini");
  ASSERT_TRUE(c.coupling.has_value());
  EXPECT_EQ(c.coupling->paths.size(), 2u);
  EXPECT_EQ(c.coupling->lower_mm.size(), 5u);
  EXPECT_EQ(c.coupling->paths[1].weight, 0.5);
  EXPECT_TRUE(c.exact);
}

TEST(Config, EmptyFileGivesDefaults) {
  const ScenarioConfig c = parse("");
  EXPECT_EQ(c.setups.size(), 4u);
  EXPECT_EQ(c.duration_per_setting_s, 30.0);
}

TEST(Config, ValuesReachTheExperiment) {
  const ScenarioConfig c = parse(
      "[source]\nphase_deg = 90\npair_rate_per_mw = 40000\n"
      "[arm_A]\nspool_length_km = 10\ndark_rate_per_s = 3\n"
      "[arm_B]\ndetector_efficiency = 0.5\n"
      "[tomography]\nmc_resamples = 250\n"
      "[run]\nsetups = c\npump_powers_mw = 7\nwindows_tau = 2\nseed = 99\nexact = yes\n"
      "calibration_cadence_min = 15\ndrift_rad_per_sqrt_min = 0.01\n");
  const ExperimentConfig e = c.experiment(qfclink::Setup::C, 7.0);
  EXPECT_NEAR(e.source.phase_rad, std::numbers::pi / 2.0, 1e-15);
  EXPECT_EQ(e.source.pair_rate_per_mW, 40000.0);
  EXPECT_EQ(e.arm_A.detector.dark_rate, 3.0);
  EXPECT_EQ(e.arm_B.detector.efficiency, 0.5);
  EXPECT_EQ(e.tomography.mc_resamples, 250);
  EXPECT_EQ(e.calibration_cadence_min, 15.0);
  EXPECT_EQ(e.drift_rad_per_sqrt_min, 0.01);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_TRUE(c.exact);
  const ExperimentConfig longer = parse("[arm_A]\nspool_length_km = 30\n").experiment(qfclink::Setup::C, 7.0);
  EXPECT_LT(longer.arm_A.survival(), e.arm_A.survival());
}

TEST(Config, InterferometerPhase) {
  const ScenarioConfig ok = parse("[source]\ninterferometer_phase_deg = 90\ninterferometer_offset_deg = 0\n");
  EXPECT_NO_THROW(ok.experiment(qfclink::Setup::A, 10.0));
  EXPECT_NE(error_of("[source]\ninterferometer_phase_deg = 2\n").find("unlockable"), std::string::npos);
}

TEST(Config, Diagnostics) {
  EXPECT_EQ(error_of("[source]\npump_power_watts = 2\n"), "[source] pump_power_watts: unknown key");
  EXPECT_EQ(error_of("[sauce]\nphase_deg = 1\n"), "[sauce]: unknown section");
  EXPECT_EQ(error_of("[run]\nseed = abc\n"), "[run] seed: expected a number, got 'abc'");
  EXPECT_EQ(error_of("[run]\nexact = maybe\n"), "[run] exact: expected true or false, got 'maybe'");
  EXPECT_EQ(error_of("[run]\nsetups = a, e\n").rfind("[run] setups:", 0), 0u);
  EXPECT_EQ(error_of("[tomography]\nmc_resamples = 50\n"), "[tomography] mc_resamples: must be >= 100");
  EXPECT_EQ(error_of("[tomography]\nbackground_offset_ns = 100\n"),
            "[tomography] background_offset_ns: must be at least 150 ns");
  EXPECT_EQ(error_of("[run]\nsetup_duration_s = d600\n"),
            "[run] setup_duration_s: expected 'setup:seconds' entries, got 'd600'");
  EXPECT_EQ(error_of("[arm_A]\nrotation_euler_rad = 1, 2\n"),
            "[arm_A] rotation_euler_rad: expected three Euler angles in radians");
  EXPECT_EQ(error_of("[coupling]\npaths = x\nfocus_lens_f_mm = 4.5\nd3_bounds_mm = 1, 2\n"),
            "[coupling_x]: section missing for coupling path 'x'");
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
  const std::string e = error_of("[run]\nseed = 3\n[broken\n");
  EXPECT_EQ(e.rfind("line 3:", 0), 0u) << e;
}

TEST(Config, LoadConfigNamesTheFile) {
  try {
    load_config(kSource + "/tests/data/bad_key.ini");
    FAIL() << "no error";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("bad_key.ini: [source] pump_power_watts: unknown key"), std::string::npos) << what;
  }
  EXPECT_THROW(load_config(kSource + "/no/such/file.ini"), ConfigError);
}

TEST(Config, SchemaListsEverySection) {
  const std::string s = config_schema();
  for (const char* section : {"[source]", "[arm_A]", "[arm_B]", "[tomography]", "[run]", "[coupling]"}) {
    EXPECT_NE(s.find(section), std::string::npos) << section;
  }
}
