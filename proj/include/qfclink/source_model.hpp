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

#include <iosfwd>
#include <numbers>
#include <vector>

#include "qfclink/polarization.hpp"

namespace qfclink {

/// Cavity-enhanced SPDC pair source. Units are carried in field names.
struct SourceParams {
  double pair_rate_per_mW = 4.7e4;  // pairs / (s mW)
  double pump_power_mW = 20.0;
  double tau_H_ns = 15.78;
  double tau_V_ns = 12.94;
  double fsr_H_GHz = 1.85;
  double fsr_V_GHz = 1.83;
  double hv_mode_offset_MHz = 480.0;
  /// Pump shift that brings the central H/V mode pair into double resonance.
  /// Equal to hv_mode_offset_MHz when the source is tuned.
  double pump_compensation_MHz = 480.0;
  double crystal_bandwidth_GHz = 200.0;
  /// Lorentzian width (FWHM) of the Vernier overlap between the H and V mode
  /// combs. Fitted so the central cluster mode carries 60 % of the power.
  double cavity_linewidth_MHz = 23.39;
  double phase_rad = 270.0 * std::numbers::pi / 180.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double out_eff_A = 0.31;
  double out_eff_B = 0.214;

  double tau_mean_ns() const { return 0.5 * (tau_H_ns + tau_V_ns); }
  /// Generated pairs per second at the configured pump power.
  double pair_rate() const { return pair_rate_per_mW * pump_power_mW; }

  /// Throws std::invalid_argument when a rate/time/frequency is not strictly
  /// positive or an efficiency is outside [0, 1].
  void validate() const;
};

PureState2 source_state(const SourceParams& params);

/// Normalized signal-idler delay density (1/ns). Positive delay means the
/// H photon arrives after the V photon and decays with tau_H.
double wavepacket_coincidence_pdf(double delay_ns, const SourceParams& params);

/// Exact probability mass of the double-exponential delay density in
/// [lo_ns, hi_ns].
double wavepacket_mass(double lo_ns, double hi_ns, const SourceParams& params);

/// Expected pair coincidences in a symmetric window around zero delay:
/// eta1 eta2 R (1 - exp(-window / 2 tau_mean)) T.
double analytic_signal(double window_ns, double duration_s, double eta1, double eta2,
                       const SourceParams& params);
/// Expected accidental coincidences: eta1 eta2 R^2 window T.
double analytic_background(double window_ns, double duration_s, double eta1, double eta2,
                           const SourceParams& params);
/// analytic_signal / analytic_background.
double analytic_sbr(double window_ns, const SourceParams& params);

/// Fidelity with an accidental (maximally mixed) admixture at a given SBR:
/// (1/4 + f_wo_bg * sbr) / (1 + sbr). sbr may be +infinity.
double fidelity_ceiling(double sbr, double f_wo_bg);

struct ClusterMode {
  double frequency_GHz;
  double weight;
};

struct ClusterSpectrum {
  std::vector<ClusterMode> modes;
};

/// Mode weights of the doubly-resonant cluster: phase-matching envelope
/// (sinc^2 with FWHM crystal_bandwidth) times the Lorentzian Vernier overlap
/// of the H and V combs at order n, normalized to sum 1. n_modes must be odd.
ClusterSpectrum cluster_spectrum(const SourceParams& params, int n_modes);

/// Cavity linewidth (MHz) for which the central mode of an n_modes cluster
/// carries `central_weight` of the power. Bisection; throws when the target is
/// not bracketed.
double fit_cluster_linewidth(const SourceParams& params, int n_modes, double central_weight);

void write_cluster_csv(std::ostream& out, const ClusterSpectrum& spectrum);

struct StatePhase {
  double phase_rad;
  bool lockable;
};

/// Maps the Mach-Zehnder pump interferometer phase onto the photonic state
/// phase. Locking fails within dead_zone_rad of the fringe turning points
/// (0 and pi).
StatePhase state_phase_from_interferometer(double interferometer_phase_rad, double offset_rad,
                                           double dead_zone_rad = 10.0 * std::numbers::pi / 180.0);

}  // namespace qfclink
