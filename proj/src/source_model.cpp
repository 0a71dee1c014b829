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

#include "qfclink/source_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qfclink {

namespace {

constexpr double kNsPerS = 1e9;

// sinc^2(x) = 1/2 at x = 1.391557...
constexpr double kSincSqHalfWidth = 1.3915573782515103;

double sinc_squared(double x) {
  if (std::abs(x) < 1e-8) return 1.0;
  const double s = std::sin(x) / x;
  return s * s;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("source parameter ") + name + " must be positive");
  }
}

void require_probability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string("source parameter ") + name + " must be in [0, 1]");
  }
}

}  // namespace

void SourceParams::validate() const {
  require_positive(pair_rate_per_mW, "pair_rate_per_mW");
  require_positive(pump_power_mW, "pump_power_mW");
  require_positive(tau_H_ns, "tau_H_ns");
  require_positive(tau_V_ns, "tau_V_ns");
  require_positive(fsr_H_GHz, "fsr_H_GHz");
  require_positive(fsr_V_GHz, "fsr_V_GHz");
  require_positive(crystal_bandwidth_GHz, "crystal_bandwidth_GHz");
  require_positive(cavity_linewidth_MHz, "cavity_linewidth_MHz");
  require_probability(out_eff_A, "out_eff_A");
  require_probability(out_eff_B, "out_eff_B");
  if (c1 < 0.0 || c2 < 0.0 || !(c1 + c2 > 0.0)) {
    throw std::invalid_argument("source weights c1, c2 must be non-negative and not both zero");
  }
}

PureState2 source_state(const SourceParams& params) {
  return bell_state(params.phase_rad, params.c1, params.c2);
}

double wavepacket_coincidence_pdf(double delay_ns, const SourceParams& params) {
  const double norm = 1.0 / (params.tau_H_ns + params.tau_V_ns);
  return delay_ns >= 0.0 ? norm * std::exp(-delay_ns / params.tau_H_ns)
                         : norm * std::exp(delay_ns / params.tau_V_ns);
}

double wavepacket_mass(double lo_ns, double hi_ns, const SourceParams& params) {
  if (hi_ns <= lo_ns) return 0.0;
  const double th = params.tau_H_ns;
  const double tv = params.tau_V_ns;
  // Cumulative distribution of the double exponential.
  auto cdf = [&](double d) {
    if (d < 0.0) return tv * std::exp(d / tv) / (th + tv);
    return 1.0 - th * std::exp(-d / th) / (th + tv);
  };
  return cdf(hi_ns) - cdf(lo_ns);
}

double analytic_signal(double window_ns, double duration_s, double eta1, double eta2,
                       const SourceParams& params) {
  if (!(window_ns > 0.0) || !(duration_s > 0.0)) {
    throw std::invalid_argument("analytic_signal: window and duration must be positive");
  }
  const double capture = -std::expm1(-window_ns / (2.0 * params.tau_mean_ns()));
  return eta1 * eta2 * params.pair_rate() * capture * duration_s;
}

double analytic_background(double window_ns, double duration_s, double eta1, double eta2,
                           const SourceParams& params) {
  if (!(window_ns > 0.0) || !(duration_s > 0.0)) {
    throw std::invalid_argument("analytic_background: window and duration must be positive");
  }
  const double r = params.pair_rate();
  return eta1 * eta2 * r * r * (window_ns / kNsPerS) * duration_s;
}

double analytic_sbr(double window_ns, const SourceParams& params) {
  if (!(window_ns > 0.0)) throw std::invalid_argument("analytic_sbr: window must be positive");
  const double capture = -std::expm1(-window_ns / (2.0 * params.tau_mean_ns()));
  return capture / (params.pair_rate() * window_ns / kNsPerS);
}

double fidelity_ceiling(double sbr, double f_wo_bg) {
  if (sbr < 0.0) throw std::invalid_argument("fidelity_ceiling: sbr must be non-negative");
  if (std::isinf(sbr)) return f_wo_bg;
  return (0.25 + f_wo_bg * sbr) / (1.0 + sbr);
}

ClusterSpectrum cluster_spectrum(const SourceParams& params, int n_modes) {
  if (n_modes < 1 || n_modes % 2 == 0) {
    throw std::invalid_argument("cluster_spectrum: n_modes must be odd and positive");
  }
  const double fsr_mean = 0.5 * (params.fsr_H_GHz + params.fsr_V_GHz);
  const double half_width_MHz = 0.5 * params.cavity_linewidth_MHz;
  const double central_mismatch_MHz = params.hv_mode_offset_MHz - params.pump_compensation_MHz;
  const int half = (n_modes - 1) / 2;

  ClusterSpectrum out;
  double total = 0.0;
  for (int n = -half; n <= half; ++n) {
    const double f = n * fsr_mean;
    const double envelope =
        sinc_squared(2.0 * kSincSqHalfWidth * f / params.crystal_bandwidth_GHz);
    // Signal in H-mode n, idler in V-mode -n: their frequency sum walks off
    // the pump by n (FSR_H - FSR_V) plus whatever the pump leaves uncompensated.
    const double mismatch_MHz = n * (params.fsr_H_GHz - params.fsr_V_GHz) * 1e3 + central_mismatch_MHz;
    const double overlap = 1.0 / (1.0 + std::pow(mismatch_MHz / half_width_MHz, 2));
    out.modes.push_back({f, envelope * overlap});
    total += envelope * overlap;
  }
  for (auto& m : out.modes) m.weight /= total;
  return out;
}

double fit_cluster_linewidth(const SourceParams& params, int n_modes, double central_weight) {
  auto central = [&](double linewidth) {
    SourceParams p = params;
    p.cavity_linewidth_MHz = linewidth;
    const auto spectrum = cluster_spectrum(p, n_modes);
    return spectrum.modes[spectrum.modes.size() / 2].weight;
  };
  // Wider linewidth -> more power leaks into the side modes.
  double lo = 1e-3;
  double hi = 1e5;
  if (!(central(lo) >= central_weight && central(hi) <= central_weight)) {
    throw std::invalid_argument("fit_cluster_linewidth: target central weight not reachable");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = std::sqrt(lo * hi);
    (central(mid) > central_weight ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void write_cluster_csv(std::ostream& out, const ClusterSpectrum& spectrum) {
  out << "frequency_GHz,weight\n";
  out.precision(12);
  for (const auto& m : spectrum.modes) out << m.frequency_GHz << ',' << m.weight << '\n';
}

StatePhase state_phase_from_interferometer(double interferometer_phase_rad, double offset_rad,
                                           double dead_zone_rad) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double phase = std::fmod(interferometer_phase_rad + offset_rad, two_pi);
  if (phase < 0.0) phase += two_pi;
  // Distance from the nearest fringe turning point (multiples of pi).
  double folded = std::fmod(interferometer_phase_rad, std::numbers::pi);
  if (folded < 0.0) folded += std::numbers::pi;
  const double to_turning = std::min(folded, std::numbers::pi - folded);
  return {phase, to_turning > dead_zone_rad};
}

}  // namespace qfclink
