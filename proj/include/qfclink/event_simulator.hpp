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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "qfclink/link_model.hpp"
#include "qfclink/polarization.hpp"

namespace qfclink {

enum class TagOrigin : std::uint8_t { Pair, Dark, ConverterNoise };

struct TimeTag {
  std::int64_t time_ps;
  std::uint8_t detector;
  TagOrigin origin;

  double time_ns() const { return static_cast<double>(time_ps) * 1e-3; }
};

struct TimeTagStream {
  std::uint8_t detector = 0;
  std::vector<TimeTag> tags;  // ascending in time_ps

  bool is_sorted() const;
};

inline constexpr std::uint8_t kDetectorA = 0;
inline constexpr std::uint8_t kDetectorB = 1;

struct CoincidenceHistogram {
  double bin_ns = 1.0;
  double range_ns = 0.0;  // bins cover [-range, range)
  std::vector<std::uint64_t> counts;

  std::size_t bins() const { return counts.size(); }
  /// Lower edge of bin i in ns.
  double bin_lower_ns(std::size_t i) const { return -range_ns + static_cast<double>(i) * bin_ns; }
};

struct WindowSpec {
  double width_ns = 0.0;
  double background_offset_ns = 300.0;

  void validate() const;
};

struct WindowCounts {
  double signal = 0.0;
  double background = 0.0;
};

/// Knobs of a single simulated acquisition.
struct RunOptions {
  /// Physical analyzer rotations: the analyzer of each arm projects onto
  /// M|b> instead of |b>. Identity leaves the nominal bases.
  Unitary2 analyzer_A = Unitary2::identity();
  Unitary2 analyzer_B = Unitary2::identity();
  /// Extra, uncalibrated rotation of the fiber in arm A (drift).
  Unitary2 drift_A = Unitary2::identity();
};

struct RunStats {
  std::uint64_t emitted_pairs = 0;
  std::uint64_t coincident_pairs = 0;  // both photons detected
  std::array<std::uint64_t, 2> pair_tags{};
  std::array<std::uint64_t, 2> dark_tags{};
  std::array<std::uint64_t, 2> noise_tags{};
};

struct SimulatedRun {
  TimeTagStream a;
  TimeTagStream b;
  RunStats stats;
};

/// Two-photon state after both arm channels, before projection.
DensityMatrix transmitted_state(const ExperimentConfig& config, const RunOptions& options = {});

/// Physical analyzer projector M_A|a><a|M_A^dagger (x) M_B|b><b|M_B^dagger.
Matrix4c analyzer_projector(const ProjectionSetting& setting, const Unitary2& m_A, const Unitary2& m_B);

/// Per-pair probabilities for one setting: both photons clicking, and each
/// photon clicking irrespective of its partner.
struct ClickProbabilities {
  double both = 0.0;
  double a = 0.0;
  double b = 0.0;
};
ClickProbabilities click_probabilities(const ExperimentConfig& config, const ProjectionSetting& setting,
                                       const RunOptions& options = {});

/// Singles rate (1/s) per arm under a setting, pairs + dark + noise.
std::array<double, 2> singles_rates(const ExperimentConfig& config, const ProjectionSetting& setting,
                                    const RunOptions& options = {});

/// Poisson pair emission over [0, duration), Born-rule polarization outcomes,
/// double-exponential delays, per-arm survival, plus dark counts and
/// converter noise. Deterministic for a given seed.
SimulatedRun simulate_run(const ExperimentConfig& config, const ProjectionSetting& setting,
                          double duration_s, std::uint64_t seed, const RunOptions& options = {});

/// Coincidence histogram of t_b - t_a with a linear merge. Throws
/// std::invalid_argument for unsorted streams or a non-positive bin/range.
CoincidenceHistogram histogram(const TimeTagStream& a, const TimeTagStream& b, double bin_ns,
                               double range_ns);

/// Pair counts with |d| <= w/2 (signal) and |d - offset| <= w/2 (background).
WindowCounts counts_in_window(const TimeTagStream& a, const TimeTagStream& b, const WindowSpec& window);
/// Same on a histogram; only bins lying entirely inside a window count.
/// Throws when a window reaches past the histogram range.
WindowCounts counts_in_window(const CoincidenceHistogram& hist, const WindowSpec& window);

/// Counts for several windows in one merge pass.
std::vector<WindowCounts> counts_in_windows(const TimeTagStream& a, const TimeTagStream& b,
                                            const std::vector<WindowSpec>& windows);

struct SbrEstimate {
  double sbr = 0.0;
  double sigma = 0.0;
};

/// (N_in - N_bg) / N_bg with Poisson error propagation. Infinite when no
/// background was seen.
SbrEstimate estimate_sbr(double in_window, double background);

struct WavepacketFit {
  double tau_H_ns = 0.0;  // positive-delay decay
  double tau_V_ns = 0.0;  // negative-delay decay
  double amplitude = 0.0; // pairs
  double offset = 0.0;    // flat accidentals per bin
  double deviance = 0.0;
};

/// Poisson maximum-likelihood fit of a bin-integrated double exponential plus
/// a constant background; bins with |d| > fit_range_ns are ignored.
WavepacketFit fit_wavepacket(const CoincidenceHistogram& hist, double fit_range_ns = 150.0);

/// One row per projection setting. Counts are doubles so exact-mode
/// expectations share the type with sampled integers.
struct CountsRow {
  ProjectionSetting setting;
  double counts = 0.0;
  double background = 0.0;
};

struct CountsTable {
  std::vector<CountsRow> rows;

  double total() const;
  double total_background() const;
};

/// {H,V,D,R} x {H,V,D,R}.
std::vector<ProjectionSetting> tomography_settings();

/// Coincidence table for all tomography settings within `window`. In exact
/// mode the entries are expectation values; otherwise each setting is an
/// independent simulate_run of `duration_s` with a seed derived from `seed`.
CountsTable counts_table(const ExperimentConfig& config, double duration_s, std::uint64_t seed,
                         const WindowSpec& window, bool exact = false, const RunOptions& options = {});

/// One table per window from the same simulated streams.
std::vector<CountsTable> counts_tables(const ExperimentConfig& config, double duration_s,
                                       std::uint64_t seed, const std::vector<WindowSpec>& windows,
                                       bool exact = false, const RunOptions& options = {});

/// Expected (signal, background) for one setting.
WindowCounts expected_counts(const ExperimentConfig& config, const ProjectionSetting& setting,
                             double duration_s, const WindowSpec& window, const RunOptions& options = {});

/// Seed for sub-task `index` of a master seed (SplitMix64 mixing).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

void write_time_tags_csv(std::ostream& out, const TimeTagStream& a, const TimeTagStream& b);
/// Reads `time_ps,detector` rows; returns one stream per detector id found
/// (index = id). Throws on malformed or descending rows.
std::vector<TimeTagStream> read_time_tags_csv(std::istream& in);

void write_counts_csv(std::ostream& out, const CountsTable& table);
/// Reads `basis_A,basis_B,counts` (an optional fourth `background` column).
CountsTable read_counts_csv(std::istream& in);

}  // namespace qfclink
