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

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "qfclink/source_model.hpp"

using namespace qfclink;

namespace {
constexpr double kPi = std::numbers::pi;

SourceParams at_power(double mW) {
  SourceParams p;
  p.pump_power_mW = mW;
  return p;
}
}  // namespace

// Reference values from an mpmath evaluation (30 digits).
TEST(SourceModel, AnalyticSbrAtTauMean) {
  const SourceParams p = at_power(20.0);
  EXPECT_NEAR(p.tau_mean_ns(), 14.36, 1e-12);
  EXPECT_NEAR(p.pair_rate(), 9.4e5, 1e-6);
  EXPECT_NEAR(analytic_sbr(p.tau_mean_ns(), p), 29.1493317939435, 1e-9);
  EXPECT_NEAR(analytic_sbr(1.5 * p.tau_mean_ns(), p), 26.0590611854731, 1e-9);
  EXPECT_NEAR(analytic_sbr(5.0 * p.tau_mean_ns(), p), 13.6003526547754, 1e-9);
}

TEST(SourceModel, SbrTimesBackgroundIsSignal) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    SourceParams p = at_power(1.0 + 40.0 * u(rng));
    p.tau_H_ns = 5.0 + 20.0 * u(rng);
    p.tau_V_ns = 5.0 + 20.0 * u(rng);
    const double w = 0.5 + 100.0 * u(rng);
    const double t = 1.0 + 1000.0 * u(rng);
    const double e1 = u(rng) + 1e-3;
    const double e2 = u(rng) + 1e-3;
    const double s = analytic_signal(w, t, e1, e2, p);
    EXPECT_NEAR(analytic_sbr(w, p) * analytic_background(w, t, e1, e2, p) / s, 1.0, 1e-12);
  }
}

TEST(SourceModel, SignalAndBackgroundForms) {
  const SourceParams p = at_power(20.0);
  const double w = 10.0;
  EXPECT_NEAR(analytic_signal(w, 100.0, 0.5, 0.4, p),
              0.5 * 0.4 * 9.4e5 * (1.0 - std::exp(-w / (2.0 * 14.36))) * 100.0, 1e-6);
  EXPECT_NEAR(analytic_background(w, 100.0, 0.5, 0.4, p), 0.5 * 0.4 * 9.4e5 * 9.4e5 * w * 1e-9 * 100.0, 1e-6);
}

TEST(SourceModel, FidelityCeiling) {
  EXPECT_DOUBLE_EQ(fidelity_ceiling(29.0, 1.0), (0.25 + 29.0) / 30.0);
  EXPECT_DOUBLE_EQ(fidelity_ceiling(0.0, 0.9), 0.25);
  EXPECT_DOUBLE_EQ(fidelity_ceiling(std::numeric_limits<double>::infinity(), 0.97), 0.97);
  double last = 0.0;
  for (double s = 0.0; s < 1e4; s = s * 1.3 + 0.01) {
    const double f = fidelity_ceiling(s, 0.8);
    EXPECT_GT(f, last);
    last = f;
  }
}

TEST(SourceModel, WavepacketPdfContinuousAndNormalized) {
  const SourceParams p;
  EXPECT_NEAR(wavepacket_coincidence_pdf(-1e-12, p), wavepacket_coincidence_pdf(1e-12, p), 1e-12);
  // Independent trapezoid quadrature.
  double sum = 0.0;
  const double h = 0.001;
  for (double d = -600.0; d < 600.0; d += h) {
    sum += 0.5 * h * (wavepacket_coincidence_pdf(d, p) + wavepacket_coincidence_pdf(d + h, p));
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_NEAR(wavepacket_mass(-1e4, 1e4, p), 1.0, 1e-12);
}

TEST(SourceModel, WavepacketMassMatchesQuadrature) {
  const SourceParams p;
  EXPECT_NEAR(wavepacket_mass(-7.18, 7.18, p), 0.392722961822346, 1e-12);
  EXPECT_NEAR(wavepacket_mass(-10.77, 10.77, p), 0.526327377933214, 1e-12);
  EXPECT_NEAR(wavepacket_mass(2.0, 30.0, p), 0.401951653246395, 1e-12);
  EXPECT_NEAR(wavepacket_mass(-40.0, -3.0, p), 0.336848096078871, 1e-12);
  // Positive delays decay with tau_H.
  EXPECT_NEAR(wavepacket_coincidence_pdf(10.0, p) / wavepacket_coincidence_pdf(0.0, p), std::exp(-10.0 / 15.78),
              1e-12);
}

TEST(SourceModel, SourceStateFollowsPhase) {
  SourceParams p;
  const Vector4c a = source_state(p).amplitudes();
  const Vector4c b = bell_state(270.0 * kPi / 180.0).amplitudes();
  EXPECT_LT((a - b).norm(), 1e-14);
}

TEST(SourceModel, ClusterSpectrum) {
  const SourceParams p;
  const ClusterSpectrum c = cluster_spectrum(p, 5);
  ASSERT_EQ(c.modes.size(), 5u);
  double total = 0.0;
  for (const auto& m : c.modes) total += m.weight;
  EXPECT_NEAR(total, 1.0, 1e-12);
  for (std::size_t i = 0; i < 5; ++i) {
    if (i != 2) {
      EXPECT_LT(c.modes[i].weight, c.modes[2].weight);
    }
    if (i > 0) {
      EXPECT_NEAR(c.modes[i].frequency_GHz - c.modes[i - 1].frequency_GHz, 1.84, 0.05);
    }
  }
  EXPECT_NEAR(c.modes[2].weight, 0.60, 0.005);
  EXPECT_THROW(cluster_spectrum(p, 4), std::invalid_argument);
}

TEST(SourceModel, ClusterLinewidthFit) {
  SourceParams p;
  const double lw = fit_cluster_linewidth(p, 5, 0.6);
  EXPECT_NEAR(lw, 23.3856, 1e-3);
  p.cavity_linewidth_MHz = lw;
  EXPECT_NEAR(cluster_spectrum(p, 5).modes[2].weight, 0.6, 1e-6);
  std::ostringstream out;
  write_cluster_csv(out, cluster_spectrum(p, 5));
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "frequency_GHz,weight");
}

TEST(SourceModel, InterferometerLocking) {
  const StatePhase s = state_phase_from_interferometer(1.0, 0.5);
  EXPECT_TRUE(s.lockable);
  EXPECT_NEAR(std::remainder(s.phase_rad - 1.5, 2.0 * kPi), 0.0, 1e-12);
  EXPECT_FALSE(state_phase_from_interferometer(0.0, 0.0).lockable);
}

TEST(SourceModel, Validation) {
  SourceParams p;
  p.tau_H_ns = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = SourceParams{};
  p.out_eff_A = 1.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
