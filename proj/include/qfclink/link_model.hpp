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
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qfclink/polarization.hpp"
#include "qfclink/source_model.hpp"

namespace qfclink {

enum class ConverterArm { H, V };

/// Polarization-preserving (Sagnac) difference-frequency converter.
struct ConverterParams {
  double eta_ext_max_H = 0.601;
  double eta_ext_max_V = 0.572;
  double waveguide_length_mm = 40.0;
  /// Normalized power efficiency per arm, 1/(W mm^2). The two arms differ
  /// through their pump/signal mode overlap.
  double eta_nor_H = 0.0;
  double eta_nor_V = 0.0;
  double pump_power_H_W = 0.485;
  double pump_power_V_W = 0.630;
  /// Deliberate rotation of the achromatic waveplate in the loop (H -> V).
  Unitary2 process_unitary = jones_rotation(std::numbers::pi / 2.0);
  double process_fidelity = 0.99947;
  /// Raman noise prefactor, counts / (s W), at the filter stage output.
  double noise_coeff = 0.0;
  bool filter_stage_enabled = true;
  /// Transmission of the BPF + VBG + etalon stage, implied by the device
  /// efficiency with (57.2 %) and without (60 %) the stage.
  double filter_stage_transmission = 0.572 / 0.600;
  /// Width of the broadband Raman noise reaching the output when the filter
  /// stage is bypassed.
  double noise_band_GHz = 1500.0;

  /// Default converter with both arms and the noise prefactor calibrated:
  /// V arm peaks at 630 mW, H arm reaches 57.2 % at the matched 485 mW, and
  /// the noise is 24 /s at 1.1 W total pump.
  static ConverterParams calibrated();

  double total_pump_W() const { return pump_power_H_W + pump_power_V_W; }
  void validate() const;
};

/// eta_nor placing the sin^2 maximum at peak_power_W.
double eta_nor_for_peak(double peak_power_W, double length_mm);
/// eta_nor that yields `efficiency` at `power_W` on the rising branch.
double eta_nor_for_point(double power_W, double efficiency, double eta_max, double length_mm);

/// eta_max sin^2(sqrt(eta_nor P) L) for the given arm.
double conversion_efficiency(double pump_W, const ConverterParams& params, ConverterArm arm);
/// Pump power of the first maximum of the arm's efficiency curve.
double peak_pump_power(const ConverterParams& params, ConverterArm arm);

/// Internal efficiency seen by the noise photons as a function of the total
/// pump; each counter-propagating arm receives half of it.
double noise_internal_efficiency(double total_pump_W, const ConverterParams& params);
/// Total pump of the first maximum of noise_internal_efficiency.
double noise_peak_total_pump(const ConverterParams& params);
/// noise_coeff P (1 - eta_int(P)): Raman noise partly back-converted and
/// rejected by the filters.
double converter_noise_rate(double total_pump_W, const ConverterParams& params);
/// noise_coeff giving `rate` counts/s at `total_pump_W`.
double calibrate_noise_coeff(const ConverterParams& params, double total_pump_W, double rate);

enum class FilterKind { FPI, VBG, BPF, Etalon };

struct FilterParams {
  FilterKind kind = FilterKind::FPI;
  double fsr_GHz = 0.0;  // FPI / Etalon only
  double fwhm_MHz = 0.0;
  double peak_transmission = 1.0;
  double coating_reflectivity = 0.0;  // FPI only

  double finesse() const;
  void validate() const;
};

/// Monolithic 854 nm Fabry-Perot filter: R = 0.9935, FSR 50 GHz, FWHM 104 MHz.
FilterParams fpi_filter(double peak_transmission = 1.0);
FilterParams etalon_filter();
FilterParams vbg_filter();
FilterParams bandpass_filter();

/// Airy function for FPI/Etalon, Lorentzian for VBG, top-hat for BPF.
double filter_transmission(double detuning_MHz, const FilterParams& params);
/// pi sqrt(R) / (1 - R).
double reflectivity_finesse(double reflectivity);
/// Weighted transmission of a cluster spectrum, sum_n w_n T(f_n).
double cluster_transmission(const FilterParams& params, const ClusterSpectrum& spectrum);
/// Integral of the peak-normalized cascade transmission over a band centred
/// on the signal, in GHz.
double noise_bandwidth_GHz(std::span<const FilterParams> cascade, double band_GHz);

struct FiberParams {
  double length_km = 0.0;
  double attenuation_dB_per_km = 0.17;
  Unitary2 rotation = Unitary2::identity();
};

/// 10^(-attenuation length / 10).
double fiber_survival(const FiberParams& params);

enum class DetectorKind { APD, SNSPD };

struct DetectorParams {
  double efficiency = 0.45;
  double dark_rate = 10.0;  // counts / s
  DetectorKind kind = DetectorKind::APD;
};

/// rho -> keep * U rho U^dagger + (1 - keep) I/2.
struct PolarizationChannel {
  Unitary2 unitary = Unitary2::identity();
  double keep = 1.0;

  Matrix2c apply(const Matrix2c& rho) const;
  /// Process fidelity with respect to `unitary`: keep + (1 - keep)/4.
  double process_fidelity() const { return keep + (1.0 - keep) / 4.0; }
};

/// Depolarizing admixture around u whose process fidelity is f.
PolarizationChannel depolarized(const Unitary2& u, double process_fidelity);

enum class ElementKind { Converter, Fiber, Filter, Splitter, Loss };

struct ChannelElement {
  std::string name;
  ElementKind kind = ElementKind::Loss;
  double survival = 1.0;
  PolarizationChannel polarization;
  /// Noise photons per second injected at this element's output.
  double added_noise_rate = 0.0;
  /// Fraction of incoming broadband noise that passes.
  double noise_survival = 1.0;
};

struct ChannelChain {
  std::vector<ChannelElement> elements;
};

double chain_survival(const ChannelChain& chain);
/// Elements compose left to right (first element acts first).
PolarizationChannel chain_polarization_channel(const ChannelChain& chain);
/// Noise rate at the chain output.
double chain_noise_rate(const ChannelChain& chain);
/// Per-element survival and cumulative loss in dB.
nlohmann::json chain_report(const ChannelChain& chain);

ChannelElement converter_element(const ConverterParams& params, std::string name = "converter");
ChannelElement fiber_element(const FiberParams& params, std::string name = "fiber",
                             double connector_survival = 1.0);
/// Survival is the filter's transmission of `incoming`; broadband noise is
/// reduced to the filter's share of a band of noise_band_GHz.
ChannelElement filter_element(const FilterParams& params, const ClusterSpectrum& incoming,
                              double noise_band_GHz, std::string name = "filter");
ChannelElement splitter_element(double transmission, std::string name = "splitter");
ChannelElement loss_element(double survival, std::string name,
                            const Unitary2& rotation = Unitary2::identity());

/// Spectrum holding only the central mode, as after the source filters.
ClusterSpectrum single_mode_spectrum();

struct ArmConfig {
  double port_efficiency = 1.0;
  ChannelChain chain;
  /// Projection optics plus fiber coupling in front of the detector.
  double detection_transmission = 1.0;
  DetectorParams detector;

  /// Port to click, without polarization projection.
  double survival() const;
  /// Converter noise reaching the detector, before the polarizer.
  double noise_rate_at_detector() const;
};

struct TomographySettings {
  int max_iterations = 100000;
  double tolerance = 1e-10;
  int mc_resamples = 100;
  /// Shots per projector for the H / R calibration tomography.
  int calibration_shots = 10000;
  double background_offset_ns = 300.0;
  double histogram_range_ns = 400.0;
  double bin_ns = 1.0;
};

enum class Setup { A, B, C, D };

char setup_tag(Setup s);
/// Throws std::invalid_argument for anything but a-d (case-insensitive).
Setup parse_setup(std::string_view tag);

struct ExperimentConfig {
  Setup setup = Setup::A;
  SourceParams source;
  ArmConfig arm_A;
  ArmConfig arm_B;
  TomographySettings tomography;
  /// Coincidence windows as multiples of tau_mean.
  std::vector<double> windows_tau{1.5, 5.0};
  std::vector<double> pump_powers_mW{5.0, 10.0, 15.0, 20.0};
  double duration_per_setting_s = 30.0;
  std::uint64_t seed = 1;
  /// Minutes between polarization calibrations; 0 calibrates once.
  double calibration_cadence_min = 0.0;
  /// Random-walk drift of the fiber rotation, rad / sqrt(min). 0 disables.
  double drift_rad_per_sqrt_min = 0.0;

  void validate() const;
};

/// Optional knobs applied on top of the built-in configurations.
struct LinkOverrides {
  std::optional<SourceParams> source;
  std::optional<ConverterParams> converter;
  std::optional<double> spool_length_km;
  std::optional<double> telecom_attenuation_dB_per_km;
  std::optional<double> apd_efficiency;
  std::optional<double> snspd_efficiency;
  std::optional<double> dark_rate;
  std::optional<double> detection_transmission_854;
  std::optional<double> detection_transmission_telecom;
  std::optional<double> fpi_peak_transmission;
  std::optional<Unitary2> rotation_A;
  std::optional<Unitary2> rotation_B;
};

/// Two-arm configuration for one of the four setups: (a) source only,
/// (b) converter in arm A, (c) plus a 20 km spool, (d) retro-reflected
/// 40 km with back-conversion, fiber beamsplitter and the 854 nm FPI instead
/// of the converter filter stage.
ExperimentConfig build_config(Setup which, const LinkOverrides& overrides = {});

}  // namespace qfclink
