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

#include "qfclink/link_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qfclink {

namespace {

constexpr double kPi = std::numbers::pi;

// Measured component transmissions of the back-conversion setup.
constexpr double kFiberFiberCouplings = 0.76;
constexpr double kLinkFiber854 = 0.87;
constexpr double kRetroreflector = 0.87;
constexpr double kSpoolPassSurvival = 0.42;
constexpr double kSpoolLength_km = 20.0;
constexpr double kTelecomAttenuation = 0.17;
constexpr double kFiberBeamsplitter = 0.5;
constexpr double kPatchFiber_km = 0.01;

// Detection side. The 854 nm projection/coupling transmission reproduces the
// 4168 /s polarization-summed coincidence rate of setup (a) at 20 mW for a
// 1.5 tau_mean window with APD efficiency 0.45. Telecom side: waveplates and
// Wollaston prism (0.98) times detector-fiber coupling (0.90).
constexpr double kDetectionTransmission854 = 0.791;
constexpr double kDetectionTransmissionTelecom = 0.98 * 0.90;
constexpr double kApdEfficiency = 0.45;
constexpr double kSnspdEfficiency = 0.31;
constexpr double kDarkRate = 10.0;

constexpr double kCalibrationCadence_min = 60.0;
constexpr double kNoiseWorkingPoint_W = 1.1;
constexpr double kNoiseAtWorkingPoint = 24.0;

double sin_sq(double x) {
  const double s = std::sin(x);
  return s * s;
}

double arm_eta_max(const ConverterParams& p, ConverterArm arm) {
  return arm == ConverterArm::H ? p.eta_ext_max_H : p.eta_ext_max_V;
}

double arm_eta_nor(const ConverterParams& p, ConverterArm arm) {
  return arm == ConverterArm::H ? p.eta_nor_H : p.eta_nor_V;
}

void require_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
}

}  // namespace

ConverterParams ConverterParams::calibrated() {
  ConverterParams p;
  p.eta_nor_V = eta_nor_for_peak(0.630, p.waveguide_length_mm);
  p.eta_nor_H = eta_nor_for_point(0.485, 0.572, p.eta_ext_max_H, p.waveguide_length_mm);
  p.noise_coeff = calibrate_noise_coeff(p, kNoiseWorkingPoint_W, kNoiseAtWorkingPoint);
  return p;
}

void ConverterParams::validate() const {
  require_probability(eta_ext_max_H, "eta_ext_max_H");
  require_probability(eta_ext_max_V, "eta_ext_max_V");
  require_probability(process_fidelity, "process_fidelity");
  require_probability(filter_stage_transmission, "filter_stage_transmission");
  if (!(waveguide_length_mm > 0.0)) throw std::invalid_argument("waveguide_length_mm must be positive");
  if (!(eta_nor_H > 0.0) || !(eta_nor_V > 0.0)) {
    throw std::invalid_argument("converter eta_nor is not calibrated");
  }
  if (pump_power_H_W < 0.0 || pump_power_V_W < 0.0) throw std::invalid_argument("pump powers must be >= 0");
  if (noise_coeff < 0.0) throw std::invalid_argument("noise_coeff must be >= 0");
  if (!(noise_band_GHz > 0.0)) throw std::invalid_argument("noise_band_GHz must be positive");
}

double eta_nor_for_peak(double peak_power_W, double length_mm) {
  if (!(peak_power_W > 0.0) || !(length_mm > 0.0)) {
    throw std::invalid_argument("eta_nor_for_peak: power and length must be positive");
  }
  return (kPi / 2.0) * (kPi / 2.0) / (peak_power_W * length_mm * length_mm);
}

double eta_nor_for_point(double power_W, double efficiency, double eta_max, double length_mm) {
  if (!(power_W > 0.0) || !(length_mm > 0.0) || !(efficiency > 0.0) || efficiency > eta_max) {
    throw std::invalid_argument("eta_nor_for_point: efficiency must lie in (0, eta_max]");
  }
  const double theta = std::asin(std::sqrt(efficiency / eta_max));
  return theta * theta / (power_W * length_mm * length_mm);
}

double conversion_efficiency(double pump_W, const ConverterParams& params, ConverterArm arm) {
  if (pump_W < 0.0) throw std::invalid_argument("conversion_efficiency: pump power must be >= 0");
  const double theta = std::sqrt(arm_eta_nor(params, arm) * pump_W) * params.waveguide_length_mm;
  return arm_eta_max(params, arm) * sin_sq(theta);
}

double peak_pump_power(const ConverterParams& params, ConverterArm arm) {
  const double l = params.waveguide_length_mm;
  return (kPi / 2.0) * (kPi / 2.0) / (arm_eta_nor(params, arm) * l * l);
}

double noise_internal_efficiency(double total_pump_W, const ConverterParams& params) {
  const double eta_nor = 0.5 * (params.eta_nor_H + params.eta_nor_V);
  return sin_sq(std::sqrt(eta_nor * 0.5 * total_pump_W) * params.waveguide_length_mm);
}

double noise_peak_total_pump(const ConverterParams& params) {
  const double eta_nor = 0.5 * (params.eta_nor_H + params.eta_nor_V);
  const double l = params.waveguide_length_mm;
  return 2.0 * (kPi / 2.0) * (kPi / 2.0) / (eta_nor * l * l);
}

double converter_noise_rate(double total_pump_W, const ConverterParams& params) {
  if (total_pump_W < 0.0) throw std::invalid_argument("converter_noise_rate: pump power must be >= 0");
  return params.noise_coeff * total_pump_W * (1.0 - noise_internal_efficiency(total_pump_W, params));
}

double calibrate_noise_coeff(const ConverterParams& params, double total_pump_W, double rate) {
  const double shape = total_pump_W * (1.0 - noise_internal_efficiency(total_pump_W, params));
  if (!(shape > 0.0)) throw std::invalid_argument("calibrate_noise_coeff: degenerate working point");
  return rate / shape;
}

double FilterParams::finesse() const {
  if (kind != FilterKind::FPI && kind != FilterKind::Etalon) {
    throw std::invalid_argument("finesse is only defined for FPI and etalon filters");
  }
  return fsr_GHz * 1e3 / fwhm_MHz;
}

void FilterParams::validate() const {
  if (!(fwhm_MHz > 0.0)) throw std::invalid_argument("filter fwhm must be positive");
  require_probability(peak_transmission, "filter peak transmission");
  if (kind == FilterKind::FPI || kind == FilterKind::Etalon) {
    if (!(fsr_GHz > 0.0)) throw std::invalid_argument("filter fsr must be positive");
    if (!(fwhm_MHz < fsr_GHz * 1e3)) throw std::invalid_argument("filter fwhm must be below its fsr");
  }
}

FilterParams fpi_filter(double peak_transmission) {
  return {FilterKind::FPI, 50.0, 104.0, peak_transmission, 0.9935};
}

FilterParams etalon_filter() { return {FilterKind::Etalon, 12.5, 250.0, 0.934, 0.0}; }

FilterParams vbg_filter() { return {FilterKind::VBG, 0.0, 25e3, 0.985, 0.0}; }

FilterParams bandpass_filter() { return {FilterKind::BPF, 0.0, 1500e3, 0.96, 0.0}; }

double filter_transmission(double detuning_MHz, const FilterParams& params) {
  switch (params.kind) {
    case FilterKind::FPI:
    case FilterKind::Etalon: {
      const double coef = 2.0 * params.finesse() / kPi;
      const double s = std::sin(kPi * detuning_MHz / (params.fsr_GHz * 1e3));
      return params.peak_transmission / (1.0 + coef * coef * s * s);
    }
    case FilterKind::VBG: {
      const double x = 2.0 * detuning_MHz / params.fwhm_MHz;
      return params.peak_transmission / (1.0 + x * x);
    }
    case FilterKind::BPF:
      return std::abs(detuning_MHz) <= 0.5 * params.fwhm_MHz ? params.peak_transmission : 0.0;
  }
  return 0.0;
}

double reflectivity_finesse(double reflectivity) {
  if (!(reflectivity > 0.0 && reflectivity < 1.0)) {
    throw std::invalid_argument("reflectivity must be in (0, 1)");
  }
  return kPi * std::sqrt(reflectivity) / (1.0 - reflectivity);
}

double cluster_transmission(const FilterParams& params, const ClusterSpectrum& spectrum) {
  double t = 0.0;
  for (const auto& m : spectrum.modes) t += m.weight * filter_transmission(m.frequency_GHz * 1e3, params);
  return t;
}

double noise_bandwidth_GHz(std::span<const FilterParams> cascade, double band_GHz) {
  if (!(band_GHz > 0.0)) throw std::invalid_argument("noise band must be positive");
  double narrowest_MHz = band_GHz * 1e3;
  for (const auto& f : cascade) narrowest_MHz = std::min(narrowest_MHz, f.fwhm_MHz);
  const double half_MHz = 0.5 * band_GHz * 1e3;
  const double step = narrowest_MHz / 20.0;
  const auto n = static_cast<long>(std::ceil(2.0 * half_MHz / step));
  const double h = 2.0 * half_MHz / static_cast<double>(n);
  auto shape = [&](double nu) {
    double t = 1.0;
    for (const auto& f : cascade) t *= filter_transmission(nu, f) / f.peak_transmission;
    return t;
  };
  // Trapezoid; the integrands are smooth and periodic on this grid scale.
  double sum = 0.5 * (shape(-half_MHz) + shape(half_MHz));
  for (long i = 1; i < n; ++i) sum += shape(-half_MHz + static_cast<double>(i) * h);
  return sum * h * 1e-3;
}

double fiber_survival(const FiberParams& params) {
  if (params.length_km < 0.0 || params.attenuation_dB_per_km < 0.0) {
    throw std::invalid_argument("fiber length and attenuation must be non-negative");
  }
  return std::pow(10.0, -params.attenuation_dB_per_km * params.length_km / 10.0);
}

Matrix2c PolarizationChannel::apply(const Matrix2c& rho) const {
  const Matrix2c& u = unitary.matrix();
  return keep * (u * rho * u.adjoint()) + (1.0 - keep) * rho.trace() * Matrix2c::Identity() / 2.0;
}

PolarizationChannel depolarized(const Unitary2& u, double process_fidelity) {
  if (!(process_fidelity >= 0.25 && process_fidelity <= 1.0)) {
    throw std::invalid_argument("depolarized: process fidelity must be in [1/4, 1]");
  }
  return {u, (4.0 * process_fidelity - 1.0) / 3.0};
}

double chain_survival(const ChannelChain& chain) {
  double s = 1.0;
  for (const auto& e : chain.elements) s *= e.survival;
  return s;
}

PolarizationChannel chain_polarization_channel(const ChannelChain& chain) {
  // Depolarizing maps commute with unitaries, so the admixtures multiply.
  PolarizationChannel net;
  for (const auto& e : chain.elements) {
    net.unitary = e.polarization.unitary * net.unitary;
    net.keep *= e.polarization.keep;
  }
  return net;
}

double chain_noise_rate(const ChannelChain& chain) {
  double noise = 0.0;
  for (const auto& e : chain.elements) noise = noise * e.noise_survival + e.added_noise_rate;
  return noise;
}

nlohmann::json chain_report(const ChannelChain& chain) {
  nlohmann::json elements = nlohmann::json::array();
  double cumulative = 1.0;
  for (const auto& e : chain.elements) {
    cumulative *= e.survival;
    elements.push_back({{"name", e.name},
                        {"survival", e.survival},
                        {"cumulative_dB", cumulative > 0.0 ? 10.0 * std::log10(cumulative) : -1e300},
                        {"process_fidelity", e.polarization.process_fidelity()},
                        {"added_noise_rate", e.added_noise_rate}});
  }
  return {{"elements", std::move(elements)},
          {"survival", chain_survival(chain)},
          {"noise_rate", chain_noise_rate(chain)}};
}

ChannelElement converter_element(const ConverterParams& params, std::string name) {
  params.validate();
  const double eta = 0.5 * (conversion_efficiency(params.pump_power_H_W, params, ConverterArm::H) +
                            conversion_efficiency(params.pump_power_V_W, params, ConverterArm::V));
  ChannelElement e;
  e.name = std::move(name);
  e.kind = ElementKind::Converter;
  e.polarization = depolarized(params.process_unitary, params.process_fidelity);
  const double noise = converter_noise_rate(params.total_pump_W(), params);
  if (params.filter_stage_enabled) {
    e.survival = eta;
    e.added_noise_rate = noise;
  } else {
    e.survival = eta / params.filter_stage_transmission;
    // Without the stage the noise spreads over the whole band; whatever
    // downstream filter follows cuts it back.
    const std::vector<FilterParams> stage{bandpass_filter(), vbg_filter(), etalon_filter()};
    e.added_noise_rate = noise * params.noise_band_GHz / noise_bandwidth_GHz(stage, params.noise_band_GHz);
  }
  e.noise_survival = e.survival;
  return e;
}

ChannelElement fiber_element(const FiberParams& params, std::string name, double connector_survival) {
  require_probability(connector_survival, "connector survival");
  ChannelElement e;
  e.name = std::move(name);
  e.kind = ElementKind::Fiber;
  e.survival = fiber_survival(params) * connector_survival;
  e.noise_survival = e.survival;
  e.polarization.unitary = params.rotation;
  return e;
}

ChannelElement filter_element(const FilterParams& params, const ClusterSpectrum& incoming,
                              double noise_band_GHz, std::string name) {
  params.validate();
  ChannelElement e;
  e.name = std::move(name);
  e.kind = ElementKind::Filter;
  e.survival = cluster_transmission(params, incoming);
  const std::vector<FilterParams> one{params};
  e.noise_survival = params.peak_transmission * noise_bandwidth_GHz(one, noise_band_GHz) / noise_band_GHz;
  return e;
}

ChannelElement splitter_element(double transmission, std::string name) {
  require_probability(transmission, "splitter transmission");
  ChannelElement e;
  e.name = std::move(name);
  e.kind = ElementKind::Splitter;
  e.survival = transmission;
  e.noise_survival = transmission;
  return e;
}

ChannelElement loss_element(double survival, std::string name, const Unitary2& rotation) {
  require_probability(survival, "element survival");
  ChannelElement e;
  e.name = std::move(name);
  e.kind = ElementKind::Loss;
  e.survival = survival;
  e.noise_survival = survival;
  e.polarization.unitary = rotation;
  return e;
}

ClusterSpectrum single_mode_spectrum() { return ClusterSpectrum{{{0.0, 1.0}}}; }

double ArmConfig::survival() const {
  return port_efficiency * chain_survival(chain) * detection_transmission * detector.efficiency;
}

double ArmConfig::noise_rate_at_detector() const {
  return chain_noise_rate(chain) * detection_transmission * detector.efficiency;
}

char setup_tag(Setup s) {
  switch (s) {
    case Setup::A: return 'a';
    case Setup::B: return 'b';
    case Setup::C: return 'c';
    case Setup::D: return 'd';
  }
  return '?';
}

Setup parse_setup(std::string_view tag) {
  if (tag.size() == 1) {
    switch (std::tolower(static_cast<unsigned char>(tag[0]))) {
      case 'a': return Setup::A;
      case 'b': return Setup::B;
      case 'c': return Setup::C;
      case 'd': return Setup::D;
      default: break;
    }
  }
  throw std::invalid_argument("unknown configuration tag '" + std::string(tag) + "' (expected a, b, c or d)");
}

void ExperimentConfig::validate() const {
  source.validate();
  for (const ArmConfig* arm : {&arm_A, &arm_B}) {
    require_probability(arm->port_efficiency, "port efficiency");
    require_probability(arm->detection_transmission, "detection transmission");
    require_probability(arm->detector.efficiency, "detector efficiency");
    if (arm->detector.dark_rate < 0.0) throw std::invalid_argument("dark rate must be >= 0");
    for (const auto& e : arm->chain.elements) {
      require_probability(e.survival, "element survival");
      if (e.added_noise_rate < 0.0) throw std::invalid_argument("element noise rate must be >= 0");
    }
  }
  if (windows_tau.empty()) throw std::invalid_argument("at least one coincidence window is required");
  if (pump_powers_mW.empty()) throw std::invalid_argument("at least one pump power is required");
  for (double w : windows_tau) {
    if (!(w > 0.0)) throw std::invalid_argument("coincidence windows must be positive");
  }
  for (double p : pump_powers_mW) {
    if (!(p > 0.0)) throw std::invalid_argument("pump powers must be positive");
  }
  if (!(duration_per_setting_s > 0.0)) throw std::invalid_argument("duration must be positive");
  if (tomography.background_offset_ns < 150.0) {
    throw std::invalid_argument("background offset must be at least 150 ns");
  }
  if (tomography.mc_resamples < 100) throw std::invalid_argument("mc_resamples must be >= 100");
  if (calibration_cadence_min < 0.0 || drift_rad_per_sqrt_min < 0.0) {
    throw std::invalid_argument("calibration cadence and drift must be non-negative");
  }
}

ExperimentConfig build_config(Setup which, const LinkOverrides& o) {
  ExperimentConfig cfg;
  cfg.setup = which;
  cfg.source = o.source.value_or(SourceParams{});

  const ConverterParams converter = o.converter.value_or(ConverterParams::calibrated());
  const double telecom_att = o.telecom_attenuation_dB_per_km.value_or(kTelecomAttenuation);
  const double spool_km = o.spool_length_km.value_or(kSpoolLength_km);
  // Connector and splice losses on top of the 20 km attenuation.
  const double spool_connectors =
      kSpoolPassSurvival / fiber_survival({kSpoolLength_km, kTelecomAttenuation});

  const DetectorParams apd{o.apd_efficiency.value_or(kApdEfficiency), o.dark_rate.value_or(kDarkRate),
                           DetectorKind::APD};
  const DetectorParams snspd{o.snspd_efficiency.value_or(kSnspdEfficiency),
                             o.dark_rate.value_or(kDarkRate), DetectorKind::SNSPD};
  const double det854 = o.detection_transmission_854.value_or(kDetectionTransmission854);
  const double det_telecom = o.detection_transmission_telecom.value_or(kDetectionTransmissionTelecom);

  // Static birefringent rotations of the individual fiber sections.
  const Unitary2 rot_A = o.rotation_A.value_or(unitary_from_euler(1.1, 0.5, 0.2));
  const Unitary2 rot_B = o.rotation_B.value_or(unitary_from_euler(0.4, 0.9, -0.3));
  const Unitary2 rot_link = unitary_from_euler(-0.6, 1.3, 0.8);
  const Unitary2 rot_patch = unitary_from_euler(0.25, 0.35, -0.15);
  const Unitary2 rot_spool = unitary_from_euler(0.3, -1.1, 2.0);
  const Unitary2 rot_spool_back = unitary_from_euler(-1.4, 0.7, 0.9);

  cfg.arm_B.port_efficiency = cfg.source.out_eff_B;
  cfg.arm_B.chain.elements.push_back(loss_element(1.0, "source fiber B", rot_B));
  cfg.arm_B.detection_transmission = det854;
  cfg.arm_B.detector = apd;

  ArmConfig& a = cfg.arm_A;
  a.port_efficiency = cfg.source.out_eff_A;
  a.detection_transmission = det854;
  a.detector = apd;

  auto spool = [&](const char* name, const Unitary2& rot) {
    return fiber_element({spool_km, telecom_att, rot}, name, spool_connectors);
  };

  switch (which) {
    case Setup::A:
      a.chain.elements.push_back(loss_element(1.0, "source fiber A", rot_A));
      cfg.calibration_cadence_min = 0.0;
      break;
    case Setup::B:
    case Setup::C: {
      a.chain.elements.push_back(loss_element(kFiberFiberCouplings, "fiber-fiber couplings", rot_A));
      a.chain.elements.push_back(loss_element(kLinkFiber854, "854 nm link fiber", rot_link));
      a.chain.elements.push_back(converter_element(converter, "converter"));
      if (which == Setup::C) a.chain.elements.push_back(spool("20 km spool", rot_spool));
      a.chain.elements.push_back(
          fiber_element({kPatchFiber_km, telecom_att, rot_patch}, "telecom patch fiber"));
      a.detection_transmission = det_telecom;
      a.detector = snspd;
      cfg.calibration_cadence_min = which == Setup::C ? kCalibrationCadence_min : 0.0;
      break;
    }
    case Setup::D: {
      ConverterParams bypass = converter;
      bypass.filter_stage_enabled = false;
      a.chain.elements.push_back(loss_element(kFiberFiberCouplings, "fiber-fiber couplings", rot_A));
      a.chain.elements.push_back(splitter_element(kFiberBeamsplitter, "fiber beamsplitter (out)"));
      a.chain.elements.push_back(loss_element(kLinkFiber854, "854 nm link fiber (out)", rot_link));
      a.chain.elements.push_back(converter_element(bypass, "converter (forward)"));
      a.chain.elements.push_back(spool("20 km spool (out)", rot_spool));
      a.chain.elements.push_back(loss_element(kRetroreflector, "retroreflector"));
      a.chain.elements.push_back(spool("20 km spool (back)", rot_spool_back));
      a.chain.elements.push_back(converter_element(bypass, "converter (back)"));
      a.chain.elements.push_back(loss_element(kLinkFiber854, "854 nm link fiber (back)", rot_link.adjoint()));
      a.chain.elements.push_back(splitter_element(kFiberBeamsplitter, "fiber beamsplitter (back)"));
      a.chain.elements.push_back(filter_element(fpi_filter(o.fpi_peak_transmission.value_or(1.0)),
                                                single_mode_spectrum(), bypass.noise_band_GHz,
                                                "854 nm FPI"));
      cfg.calibration_cadence_min = kCalibrationCadence_min;
      break;
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace qfclink
