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

#include "qfclink/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace qfclink {

namespace {

namespace pt = boost::property_tree;

constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  const auto last = s.find_last_not_of(" \t\r");
  return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Reads one section, rejecting keys nobody asked for.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> text(const std::string& key) {
    seen_.insert(key);
    if (!tree_) return std::nullopt;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  std::optional<double> number(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    return to_number(key, *t);
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    std::vector<double> out;
    for (const auto& item : split(*t, ',')) out.push_back(to_number(key, item));
    if (out.empty()) fail(key, "expected a comma-separated list of numbers");
    return out;
  }

  std::optional<bool> flag(const std::string& key) {
    const auto t = text(key);
    if (!t) return std::nullopt;
    if (*t == "true" || *t == "1" || *t == "yes" || *t == "on") return true;
    if (*t == "false" || *t == "0" || *t == "no" || *t == "off") return false;
    fail(key, "expected true or false, got '" + *t + "'");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + what);
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!seen_.count(key)) throw ConfigError("[" + name_ + "] " + key + ": unknown key");
    }
  }

 private:
  double to_number(const std::string& key, const std::string& t) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + t + "'");
    }
  }

  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> seen_;
};

const pt::ptree* child(const pt::ptree& root, const std::string& name) {
  const auto it = root.find(name);
  return it == root.not_found() ? nullptr : &it->second;
}

Unitary2 euler_rotation(Section& s, const std::string& key, const std::vector<double>& v) {
  if (v.size() != 3) s.fail(key, "expected three Euler angles in radians");
  return unitary_from_euler(v[0], v[1], v[2]);
}

// "854:11.0, 1550:11.3" or a single focal length.
std::vector<std::pair<double, double>> focal_table(Section& s, const std::string& key) {
  const auto t = s.text(key);
  if (!t) s.fail(key, "missing");
  std::vector<std::pair<double, double>> table;
  for (const auto& item : split(*t, ',')) {
    const auto parts = split(item, ':');
    try {
      if (parts.size() == 1) {
        table.emplace_back(0.0, std::stod(parts[0]));
      } else if (parts.size() == 2) {
        table.emplace_back(std::stod(parts[0]), std::stod(parts[1]));
      } else {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      s.fail(key, "expected 'wavelength_nm:focal_mm' entries, got '" + item + "'");
    }
    if (table.back().second == 0.0) s.fail(key, "focal length must be nonzero");
  }
  if (table.empty()) s.fail(key, "empty focal-length table");
  return table;
}

void read_bounds(Section& s, const std::string& key, std::vector<double>& lower, std::vector<double>& upper) {
  const auto b = s.numbers(key);
  if (!b || b->size() != 2) s.fail(key, "expected 'lower, upper' in mm");
  if (!((*b)[0] >= 0.0 && (*b)[0] <= (*b)[1])) s.fail(key, "bounds must satisfy 0 <= lower <= upper");
  lower.push_back((*b)[0]);
  upper.push_back((*b)[1]);
}

CouplingProblem parse_coupling(const pt::ptree& root, std::vector<Section>& used) {
  used.emplace_back("coupling", child(root, "coupling"));
  Section* top = &used.back();
  const auto names = top->text("paths");
  if (!names) top->fail("paths", "missing");
  const auto path_names = split(*names, ',');
  if (path_names.empty()) top->fail("paths", "expected at least one path name");
  const auto focus = focal_table(*top, "focus_lens_f_mm");
  std::vector<double> d3_lower;
  std::vector<double> d3_upper;
  read_bounds(*top, "d3_bounds_mm", d3_lower, d3_upper);

  CouplingProblem problem;
  const int shared = static_cast<int>(2 * path_names.size());
  for (std::size_t i = 0; i < path_names.size(); ++i) {
    const std::string section = "coupling_" + path_names[i];
    const pt::ptree* tree = child(root, section);
    if (!tree) throw ConfigError("[" + section + "]: section missing for coupling path '" + path_names[i] + "'");
    used.emplace_back(section, tree);
    Section& s = used.back();
    const auto lambda = s.number("wavelength_nm");
    const auto mfd = s.number("fiber_mfd_um");
    const auto waist = s.number("target_waist_um");
    if (!lambda || !(*lambda > 0.0)) s.fail("wavelength_nm", "missing or not positive");
    if (!mfd || !(*mfd > 0.0)) s.fail("fiber_mfd_um", "missing or not positive");
    if (!waist || !(*waist > 0.0)) s.fail("target_waist_um", "missing or not positive");
    CouplingPath path;
    path.name = path_names[i];
    path.input = GaussianBeam::from_waist(*lambda, 0.5 * *mfd);
    path.target = {*lambda, *waist};
    path.weight = s.number("weight").value_or(1.0);
    if (!(path.weight >= 0.0)) s.fail("weight", "must be non-negative");
    const int d1 = static_cast<int>(2 * i);
    path.train.elements = {OpticalElement::free_space(0.0, d1), OpticalElement::lens(focal_table(s, "collimator_f_mm")),
                           OpticalElement::free_space(0.0, d1 + 1), OpticalElement::lens(focus),
                           OpticalElement::free_space(0.0, shared)};
    read_bounds(s, "d1_bounds_mm", problem.lower_mm, problem.upper_mm);
    read_bounds(s, "d2_bounds_mm", problem.lower_mm, problem.upper_mm);
    problem.paths.push_back(std::move(path));
  }
  problem.lower_mm.push_back(d3_lower.front());
  problem.upper_mm.push_back(d3_upper.front());
  return problem;
}

}  // namespace

ExperimentConfig ScenarioConfig::experiment(Setup setup, double pump_power_mW) const {
  LinkOverrides o = link;
  SourceParams src = o.source.value_or(SourceParams{});
  src.pump_power_mW = pump_power_mW;
  if (interferometer_phase_rad) {
    const StatePhase sp = state_phase_from_interferometer(*interferometer_phase_rad, interferometer_offset_rad);
    if (!sp.lockable) throw ConfigError("[source] interferometer_phase_deg: inside the unlockable fringe region");
    src.phase_rad = sp.phase_rad;
  }
  o.source = src;
  ExperimentConfig cfg = build_config(setup, o);
  auto apply = [](ArmConfig& arm, const ArmOverrides& a) {
    if (a.detection_transmission) arm.detection_transmission = *a.detection_transmission;
    if (a.detector_efficiency) arm.detector.efficiency = *a.detector_efficiency;
    if (a.dark_rate) arm.detector.dark_rate = *a.dark_rate;
  };
  apply(cfg.arm_A, arm_A);
  apply(cfg.arm_B, arm_B);
  cfg.tomography = tomography;
  cfg.windows_tau = windows_tau;
  cfg.pump_powers_mW = pump_powers_mW;
  cfg.duration_per_setting_s = duration_s(setup);
  cfg.seed = seed;
  if (calibration_cadence_min) cfg.calibration_cadence_min = *calibration_cadence_min;
  cfg.drift_rad_per_sqrt_min = drift_rad_per_sqrt_min;
  cfg.validate();
  return cfg;
}

double ScenarioConfig::duration_s(Setup setup) const {
  const auto it = setup_duration_s.find(setup);
  return it == setup_duration_s.end() ? duration_per_setting_s : it->second;
}

void ScenarioConfig::validate() const {
  if (setups.empty()) throw ConfigError("[run] setups: at least one setup is required");
  if (parallelism < 1) throw ConfigError("[run] parallelism: must be >= 1");
  try {
    for (Setup s : setups) {
      for (double p : pump_powers_mW) experiment(s, p);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
}

ScenarioConfig parse_config(std::istream& in) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }

  static const std::set<std::string> kSections{"source", "arm_A", "arm_B", "tomography", "run", "coupling"};
  for (const auto& [name, tree] : root) {
    if (!tree.data().empty() && tree.empty()) throw ConfigError(name + ": key outside of any section");
    if (!kSections.count(name) && name.rfind("coupling_", 0) != 0) {
      throw ConfigError("[" + name + "]: unknown section");
    }
  }

  ScenarioConfig cfg;
  std::vector<Section> sections;
  sections.reserve(16);

  sections.emplace_back("source", child(root, "source"));
  {
    Section& s = sections.back();
    SourceParams p;
    auto set = [&](const char* key, double& field, double scale = 1.0) {
      if (auto v = s.number(key)) field = *v * scale;
    };
    set("pair_rate_per_mw", p.pair_rate_per_mW);
    set("tau_h_ns", p.tau_H_ns);
    set("tau_v_ns", p.tau_V_ns);
    set("fsr_h_ghz", p.fsr_H_GHz);
    set("fsr_v_ghz", p.fsr_V_GHz);
    set("hv_mode_offset_mhz", p.hv_mode_offset_MHz);
    set("pump_compensation_mhz", p.pump_compensation_MHz);
    set("crystal_bandwidth_ghz", p.crystal_bandwidth_GHz);
    set("cavity_linewidth_mhz", p.cavity_linewidth_MHz);
    set("phase_deg", p.phase_rad, kDeg);
    set("c1", p.c1);
    set("c2", p.c2);
    set("out_eff_a", p.out_eff_A);
    set("out_eff_b", p.out_eff_B);
    if (auto v = s.number("interferometer_phase_deg")) cfg.interferometer_phase_rad = *v * kDeg;
    if (auto v = s.number("interferometer_offset_deg")) cfg.interferometer_offset_rad = *v * kDeg;
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[source] ") + e.what());
    }
    cfg.link.source = p;
  }

  sections.emplace_back("arm_A", child(root, "arm_A"));
  {
    Section& s = sections.back();
    ConverterParams conv = ConverterParams::calibrated();
    bool conv_changed = false;
    auto conv_set = [&](const char* key, double& field) {
      if (auto v = s.number(key)) {
        field = *v;
        conv_changed = true;
      }
    };
    conv_set("converter_pump_h_w", conv.pump_power_H_W);
    conv_set("converter_pump_v_w", conv.pump_power_V_W);
    conv_set("converter_process_fidelity", conv.process_fidelity);
    if (auto v = s.number("converter_noise_at_1100mw_per_s")) {
      conv.noise_coeff = calibrate_noise_coeff(conv, 1.1, *v);
      conv_changed = true;
    }
    if (conv_changed) {
      try {
        conv.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[arm_A] converter: ") + e.what());
      }
      cfg.link.converter = conv;
    }
    cfg.link.spool_length_km = s.number("spool_length_km");
    cfg.link.telecom_attenuation_dB_per_km = s.number("telecom_attenuation_db_per_km");
    cfg.link.snspd_efficiency = s.number("snspd_efficiency");
    cfg.link.apd_efficiency = s.number("apd_efficiency");
    cfg.link.detection_transmission_854 = s.number("detection_transmission_854");
    cfg.link.detection_transmission_telecom = s.number("detection_transmission_telecom");
    cfg.link.fpi_peak_transmission = s.number("fpi_peak_transmission");
    if (auto v = s.numbers("rotation_euler_rad")) cfg.link.rotation_A = euler_rotation(s, "rotation_euler_rad", *v);
    cfg.arm_A.dark_rate = s.number("dark_rate_per_s");
  }

  sections.emplace_back("arm_B", child(root, "arm_B"));
  {
    Section& s = sections.back();
    cfg.arm_B.detection_transmission = s.number("detection_transmission");
    cfg.arm_B.detector_efficiency = s.number("detector_efficiency");
    cfg.arm_B.dark_rate = s.number("dark_rate_per_s");
    if (auto v = s.numbers("rotation_euler_rad")) cfg.link.rotation_B = euler_rotation(s, "rotation_euler_rad", *v);
  }

  sections.emplace_back("tomography", child(root, "tomography"));
  {
    Section& s = sections.back();
    TomographySettings& t = cfg.tomography;
    if (auto v = s.number("max_iterations")) t.max_iterations = static_cast<int>(*v);
    if (auto v = s.number("tolerance")) t.tolerance = *v;
    if (auto v = s.number("mc_resamples")) t.mc_resamples = static_cast<int>(*v);
    if (auto v = s.number("calibration_shots")) t.calibration_shots = static_cast<int>(*v);
    if (auto v = s.number("background_offset_ns")) t.background_offset_ns = *v;
    if (auto v = s.number("histogram_range_ns")) t.histogram_range_ns = *v;
    if (auto v = s.number("bin_ns")) t.bin_ns = *v;
    if (t.mc_resamples < 100) s.fail("mc_resamples", "must be >= 100");
    if (t.max_iterations < 1) s.fail("max_iterations", "must be >= 1");
    if (!(t.tolerance > 0.0)) s.fail("tolerance", "must be positive");
    if (t.calibration_shots < 1) s.fail("calibration_shots", "must be >= 1");
    if (!(t.background_offset_ns >= 150.0)) s.fail("background_offset_ns", "must be at least 150 ns");
  }

  sections.emplace_back("run", child(root, "run"));
  {
    Section& s = sections.back();
    if (auto t = s.text("setups")) {
      cfg.setups.clear();
      for (const auto& tag : split(*t, ',')) {
        try {
          cfg.setups.push_back(parse_setup(tag));
        } catch (const std::invalid_argument& e) {
          s.fail("setups", e.what());
        }
      }
    }
    if (auto v = s.numbers("pump_powers_mw")) cfg.pump_powers_mW = *v;
    if (auto v = s.numbers("windows_tau")) cfg.windows_tau = *v;
    if (auto v = s.number("duration_per_setting_s")) cfg.duration_per_setting_s = *v;
    if (auto t = s.text("setup_duration_s")) {
      for (const auto& item : split(*t, ',')) {
        const auto parts = split(item, ':');
        try {
          if (parts.size() != 2) throw std::invalid_argument(item);
          const double d = std::stod(parts[1]);
          if (!(d > 0.0)) throw std::invalid_argument(item);
          cfg.setup_duration_s[parse_setup(parts[0])] = d;
        } catch (const std::exception&) {
          s.fail("setup_duration_s", "expected 'setup:seconds' entries, got '" + item + "'");
        }
      }
    }
    if (auto v = s.number("seed")) {
      if (*v < 0 || *v != std::floor(*v)) s.fail("seed", "must be a non-negative integer");
      cfg.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = s.flag("exact")) cfg.exact = *v;
    if (auto v = s.number("parallelism")) cfg.parallelism = static_cast<int>(*v);
    cfg.calibration_cadence_min = s.number("calibration_cadence_min");
    if (auto v = s.number("drift_rad_per_sqrt_min")) cfg.drift_rad_per_sqrt_min = *v;
    for (double p : cfg.pump_powers_mW) {
      if (!(p > 0.0)) s.fail("pump_powers_mw", "powers must be positive");
    }
    for (double w : cfg.windows_tau) {
      if (!(w > 0.0)) s.fail("windows_tau", "windows must be positive");
    }
    if (!(cfg.duration_per_setting_s > 0.0)) s.fail("duration_per_setting_s", "must be positive");
    if (cfg.parallelism < 1) s.fail("parallelism", "must be >= 1");
  }

  if (child(root, "coupling")) cfg.coupling = parse_coupling(root, sections);

  for (const auto& s : sections) s.reject_unknown();
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string config_schema() {
  return R"([source]      pair_rate_per_mw, tau_h_ns, tau_v_ns, fsr_h_ghz, fsr_v_ghz,
              hv_mode_offset_mhz, pump_compensation_mhz, crystal_bandwidth_ghz,
              cavity_linewidth_mhz, phase_deg, c1, c2, out_eff_a, out_eff_b,
              interferometer_phase_deg, interferometer_offset_deg
[arm_A]       converter_pump_h_w, converter_pump_v_w, converter_process_fidelity,
              converter_noise_at_1100mw_per_s, spool_length_km,
              telecom_attenuation_db_per_km, apd_efficiency, snspd_efficiency,
              detection_transmission_854, detection_transmission_telecom,
              fpi_peak_transmission, rotation_euler_rad (3 values), dark_rate_per_s
[arm_B]       detection_transmission, detector_efficiency, dark_rate_per_s,
              rotation_euler_rad (3 values)
[tomography]  max_iterations, tolerance, mc_resamples, calibration_shots,
              background_offset_ns, histogram_range_ns, bin_ns
[run]         setups (a,b,c,d), pump_powers_mw, windows_tau, duration_per_setting_s,
              setup_duration_s (e.g. d:600), seed, exact, parallelism,
              calibration_cadence_min, drift_rad_per_sqrt_min
[coupling]    paths, focus_lens_f_mm (nm:mm table), d3_bounds_mm
[coupling_<path>]  wavelength_nm, fiber_mfd_um, collimator_f_mm, target_waist_um,
              weight, d1_bounds_mm, d2_bounds_mm
)";
}

}  // namespace qfclink
