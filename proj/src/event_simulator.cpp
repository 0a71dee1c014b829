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

#include "qfclink/event_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "qfclink/simplex.hpp"
#include "qfclink/source_model.hpp"

namespace qfclink {

namespace {

constexpr double kPsPerNs = 1e3;
constexpr double kPsPerS = 1e12;

std::int64_t to_ps(double ns) { return std::llround(ns * kPsPerNs); }

// rho -> keep U rho U^dagger + (1 - keep) I/2 (x) Tr_arm(rho) on one arm.
Matrix4c apply_arm_channel(const Matrix4c& rho, const PolarizationChannel& ch, bool arm_a) {
  const Matrix2c I = Matrix2c::Identity();
  const Matrix4c u = arm_a ? Matrix4c(Eigen::kroneckerProduct(ch.unitary.matrix(), I))
                           : Matrix4c(Eigen::kroneckerProduct(I, ch.unitary.matrix()));
  Matrix4c out = u * rho * u.adjoint();
  if (ch.keep >= 1.0) return out;

  Matrix2c reduced = Matrix2c::Zero();  // state of the other arm
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        reduced(i, j) += arm_a ? out(k * 2 + i, k * 2 + j) : out(i * 2 + k, j * 2 + k);
      }
    }
  }
  const Matrix4c mixed = arm_a ? Matrix4c(Eigen::kroneckerProduct(I / 2.0, reduced))
                               : Matrix4c(Eigen::kroneckerProduct(reduced, I / 2.0));
  return ch.keep * out + (1.0 - ch.keep) * mixed;
}

PolarizationChannel arm_channel(const ArmConfig& arm, const Unitary2& drift) {
  PolarizationChannel ch = chain_polarization_channel(arm.chain);
  ch.unitary = drift * ch.unitary;
  return ch;
}

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine);
  }
  std::uint64_t binomial(std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    return std::binomial_distribution<std::uint64_t>(n, p)(engine);
  }
};

void sort_stream(TimeTagStream& s) {
  std::sort(s.tags.begin(), s.tags.end(),
            [](const TimeTag& x, const TimeTag& y) { return x.time_ps < y.time_ps; });
}

void require_sorted(const TimeTagStream& s) {
  if (!s.is_sorted()) throw std::invalid_argument("time-tag stream is not sorted by time");
}

// Calls visit(delay_ps) for every pair with delay in [lo_ps, hi_ps].
template <typename Visit>
void for_each_pair(const TimeTagStream& a, const TimeTagStream& b, std::int64_t lo_ps,
                   std::int64_t hi_ps, Visit&& visit) {
  require_sorted(a);
  require_sorted(b);
  std::size_t start = 0;
  const auto& tb = b.tags;
  for (const auto& ta : a.tags) {
    while (start < tb.size() && tb[start].time_ps - ta.time_ps < lo_ps) ++start;
    for (std::size_t j = start; j < tb.size(); ++j) {
      const std::int64_t d = tb[j].time_ps - ta.time_ps;
      if (d > hi_ps) break;
      visit(d);
    }
  }
}

double cdf_double_exp(double d, double tau_h, double tau_v) {
  if (d < 0.0) return tau_v * std::exp(d / tau_v) / (tau_h + tau_v);
  return 1.0 - tau_h * std::exp(-d / tau_h) / (tau_h + tau_v);
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  const auto last = s.find_last_not_of(" \t\r");
  return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  return out;
}

}  // namespace

bool TimeTagStream::is_sorted() const {
  return std::is_sorted(tags.begin(), tags.end(),
                        [](const TimeTag& x, const TimeTag& y) { return x.time_ps < y.time_ps; });
}

void WindowSpec::validate() const {
  if (!(width_ns > 0.0)) throw std::invalid_argument("window width must be positive");
  if (!(background_offset_ns >= 150.0)) {
    throw std::invalid_argument("background offset must be at least 150 ns");
  }
}

DensityMatrix transmitted_state(const ExperimentConfig& config, const RunOptions& options) {
  const DensityMatrix source = DensityMatrix::from_pure(source_state(config.source));
  Matrix4c rho = source.matrix();
  rho = apply_arm_channel(rho, arm_channel(config.arm_A, options.drift_A), true);
  rho = apply_arm_channel(rho, arm_channel(config.arm_B, Unitary2::identity()), false);
  return DensityMatrix::from_matrix(rho);
}

Matrix4c analyzer_projector(const ProjectionSetting& setting, const Unitary2& m_A, const Unitary2& m_B) {
  const Matrix2c pa = m_A.matrix() * projector_matrix(setting.a) * m_A.matrix().adjoint();
  const Matrix2c pb = m_B.matrix() * projector_matrix(setting.b) * m_B.matrix().adjoint();
  return Eigen::kroneckerProduct(pa, pb);
}

ClickProbabilities click_probabilities(const ExperimentConfig& config, const ProjectionSetting& setting,
                                       const RunOptions& options) {
  const DensityMatrix rho = transmitted_state(config, options);
  const Unitary2& m_A = options.analyzer_A;
  const Unitary2& m_B = options.analyzer_B;
  const Matrix2c I = Matrix2c::Identity();
  const Matrix2c pa = m_A.matrix() * projector_matrix(setting.a) * m_A.matrix().adjoint();
  const Matrix2c pb = m_B.matrix() * projector_matrix(setting.b) * m_B.matrix().adjoint();
  ClickProbabilities p;
  p.both = born_probability(rho, Matrix4c(Eigen::kroneckerProduct(pa, pb)));
  p.a = born_probability(rho, Matrix4c(Eigen::kroneckerProduct(pa, I)));
  p.b = born_probability(rho, Matrix4c(Eigen::kroneckerProduct(I, pb)));
  return p;
}

std::array<double, 2> singles_rates(const ExperimentConfig& config, const ProjectionSetting& setting,
                                    const RunOptions& options) {
  const ClickProbabilities p = click_probabilities(config, setting, options);
  const double r = config.source.pair_rate();
  // Unpolarized noise passes the analyzer with probability 1/2.
  return {r * config.arm_A.survival() * p.a + config.arm_A.detector.dark_rate +
              0.5 * config.arm_A.noise_rate_at_detector(),
          r * config.arm_B.survival() * p.b + config.arm_B.detector.dark_rate +
              0.5 * config.arm_B.noise_rate_at_detector()};
}

SimulatedRun simulate_run(const ExperimentConfig& config, const ProjectionSetting& setting,
                          double duration_s, std::uint64_t seed, const RunOptions& options) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("simulate_run: duration must be positive");
  const ClickProbabilities p = click_probabilities(config, setting, options);
  const double s_a = config.arm_A.survival();
  const double s_b = config.arm_B.survival();
  const double tau_h = config.source.tau_H_ns * kPsPerNs;
  const double tau_v = config.source.tau_V_ns * kPsPerNs;
  const double span_ps = duration_s * kPsPerS;
  const auto end_ps = static_cast<std::int64_t>(std::floor(span_ps));

  // Thinning of the pair process: only pairs that produce at least one click
  // are materialized.
  const double q_both = std::clamp(s_a * s_b * p.both, 0.0, 1.0);
  const double q_a = std::clamp(s_a * p.a - q_both, 0.0, 1.0);
  const double q_b = std::clamp(s_b * p.b - q_both, 0.0, 1.0);

  Rng rng(seed);
  SimulatedRun run;
  run.a.detector = kDetectorA;
  run.b.detector = kDetectorB;
  RunStats& st = run.stats;
  st.emitted_pairs = rng.poisson(config.source.pair_rate() * duration_s);
  std::uint64_t left = st.emitted_pairs;
  double p_left = 1.0;
  auto draw_class = [&](double q) {
    const std::uint64_t n = p_left > 0.0 ? rng.binomial(left, std::min(1.0, q / p_left)) : 0;
    left -= n;
    p_left -= q;
    return n;
  };
  const std::uint64_t n_both = draw_class(q_both);
  const std::uint64_t n_a = draw_class(q_a);
  const std::uint64_t n_b = draw_class(q_b);
  st.coincident_pairs = n_both;

  const double noise_a = config.arm_A.detector.dark_rate;
  const double noise_b = config.arm_B.detector.dark_rate;
  const double conv_a = 0.5 * config.arm_A.noise_rate_at_detector();
  const double conv_b = 0.5 * config.arm_B.noise_rate_at_detector();
  const std::uint64_t dark_a = rng.poisson(noise_a * duration_s);
  const std::uint64_t dark_b = rng.poisson(noise_b * duration_s);
  const std::uint64_t conv_na = rng.poisson(conv_a * duration_s);
  const std::uint64_t conv_nb = rng.poisson(conv_b * duration_s);

  run.a.tags.reserve(n_both + n_a + dark_a + conv_na);
  run.b.tags.reserve(n_both + n_b + dark_b + conv_nb);

  std::uniform_real_distribution<double> uniform(0.0, span_ps);
  std::exponential_distribution<double> exp_v(1.0 / tau_v);
  std::exponential_distribution<double> exp_h(1.0 / tau_h);
  auto push = [&](TimeTagStream& s, double t, TagOrigin origin) {
    const auto ps = static_cast<std::int64_t>(std::floor(t));
    if (ps < end_ps) s.tags.push_back({ps, s.detector, origin});
  };
  // The arm A photon decays with tau_V and the arm B photon with tau_H, so
  // t_b - t_a follows the double exponential with tau_H on the positive side.
  for (std::uint64_t i = 0; i < n_both; ++i) {
    const double t0 = uniform(rng.engine);
    push(run.a, t0 + exp_v(rng.engine), TagOrigin::Pair);
    push(run.b, t0 + exp_h(rng.engine), TagOrigin::Pair);
  }
  for (std::uint64_t i = 0; i < n_a; ++i) push(run.a, uniform(rng.engine) + exp_v(rng.engine), TagOrigin::Pair);
  for (std::uint64_t i = 0; i < n_b; ++i) push(run.b, uniform(rng.engine) + exp_h(rng.engine), TagOrigin::Pair);
  st.pair_tags = {run.a.tags.size(), run.b.tags.size()};
  for (std::uint64_t i = 0; i < dark_a; ++i) push(run.a, uniform(rng.engine), TagOrigin::Dark);
  for (std::uint64_t i = 0; i < dark_b; ++i) push(run.b, uniform(rng.engine), TagOrigin::Dark);
  st.dark_tags = {dark_a, dark_b};
  for (std::uint64_t i = 0; i < conv_na; ++i) push(run.a, uniform(rng.engine), TagOrigin::ConverterNoise);
  for (std::uint64_t i = 0; i < conv_nb; ++i) push(run.b, uniform(rng.engine), TagOrigin::ConverterNoise);
  st.noise_tags = {conv_na, conv_nb};

  sort_stream(run.a);
  sort_stream(run.b);
  return run;
}

CoincidenceHistogram histogram(const TimeTagStream& a, const TimeTagStream& b, double bin_ns,
                               double range_ns) {
  if (!(bin_ns > 0.0) || !(range_ns > 0.0)) {
    throw std::invalid_argument("histogram: bin and range must be positive");
  }
  const std::int64_t bin_ps = to_ps(bin_ns);
  const std::int64_t range_ps = to_ps(range_ns);
  if (bin_ps <= 0) throw std::invalid_argument("histogram: bin below 1 ps");
  CoincidenceHistogram h;
  h.bin_ns = bin_ns;
  h.range_ns = range_ns;
  h.counts.assign(static_cast<std::size_t>((2 * range_ps + bin_ps - 1) / bin_ps), 0);
  for_each_pair(a, b, -range_ps, range_ps - 1, [&](std::int64_t d) {
    ++h.counts[static_cast<std::size_t>((d + range_ps) / bin_ps)];
  });
  return h;
}

std::vector<WindowCounts> counts_in_windows(const TimeTagStream& a, const TimeTagStream& b,
                                            const std::vector<WindowSpec>& windows) {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::vector<std::int64_t> width_ps;
  std::vector<std::int64_t> offset_ps;
  for (const auto& w : windows) {
    w.validate();
    width_ps.push_back(to_ps(w.width_ns));
    offset_ps.push_back(to_ps(w.background_offset_ns));
    lo = std::min(lo, -width_ps.back() / 2 - 1);
    hi = std::max(hi, offset_ps.back() + width_ps.back() / 2 + 1);
  }
  std::vector<std::uint64_t> sig(windows.size(), 0);
  std::vector<std::uint64_t> bg(windows.size(), 0);
  for_each_pair(a, b, lo, hi, [&](std::int64_t d) {
    for (std::size_t k = 0; k < windows.size(); ++k) {
      // |d| <= w/2 in exact integer arithmetic.
      if (2 * std::abs(d) <= width_ps[k]) ++sig[k];
      if (2 * std::abs(d - offset_ps[k]) <= width_ps[k]) ++bg[k];
    }
  });
  std::vector<WindowCounts> out;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    out.push_back({static_cast<double>(sig[k]), static_cast<double>(bg[k])});
  }
  return out;
}

WindowCounts counts_in_window(const TimeTagStream& a, const TimeTagStream& b, const WindowSpec& window) {
  return counts_in_windows(a, b, {window}).front();
}

WindowCounts counts_in_window(const CoincidenceHistogram& hist, const WindowSpec& window) {
  window.validate();
  const double half = 0.5 * window.width_ns;
  if (half > hist.range_ns || window.background_offset_ns + half > hist.range_ns) {
    throw std::invalid_argument("counts_in_window: window exceeds the histogram range");
  }
  auto sum_inside = [&](double lo, double hi) {
    double n = 0.0;
    for (std::size_t i = 0; i < hist.bins(); ++i) {
      const double b_lo = hist.bin_lower_ns(i);
      if (b_lo >= lo - 1e-9 && b_lo + hist.bin_ns <= hi + 1e-9) n += static_cast<double>(hist.counts[i]);
    }
    return n;
  };
  return {sum_inside(-half, half),
          sum_inside(window.background_offset_ns - half, window.background_offset_ns + half)};
}

SbrEstimate estimate_sbr(double in_window, double background) {
  if (in_window < 0.0 || background < 0.0) throw std::invalid_argument("estimate_sbr: negative counts");
  if (background == 0.0) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  const double sbr = (in_window - background) / background;
  const double var = in_window / (background * background) +
                     in_window * in_window / (background * background * background);
  return {sbr, std::sqrt(var)};
}

WavepacketFit fit_wavepacket(const CoincidenceHistogram& hist, double fit_range_ns) {
  std::vector<double> lo;
  std::vector<double> n;
  double total = 0.0;
  double tail = 0.0;
  int tail_bins = 0;
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    const double b_lo = hist.bin_lower_ns(i);
    if (b_lo < -fit_range_ns || b_lo + hist.bin_ns > fit_range_ns) continue;
    lo.push_back(b_lo);
    n.push_back(static_cast<double>(hist.counts[i]));
    total += n.back();
    if (std::abs(b_lo) > 0.8 * fit_range_ns) {
      tail += n.back();
      ++tail_bins;
    }
  }
  if (lo.size() < 8 || total <= 0.0) throw std::invalid_argument("fit_wavepacket: histogram too sparse");
  const double w = hist.bin_ns;
  const double c0 = tail_bins > 0 ? tail / tail_bins : 0.0;
  const double a0 = std::max(1.0, total - c0 * static_cast<double>(lo.size()));

  auto deviance = [&](std::span<const double> x) {
    const double amp = std::exp(x[0]);
    const double th = std::exp(x[1]);
    const double tv = std::exp(x[2]);
    const double c = x[3] * x[3];
    double dev = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const double mu = amp * (cdf_double_exp(lo[i] + w, th, tv) - cdf_double_exp(lo[i], th, tv)) + c;
      if (mu <= 0.0) return std::numeric_limits<double>::infinity();
      dev += mu - n[i];
      if (n[i] > 0.0) dev += n[i] * std::log(n[i] / mu);
    }
    return 2.0 * dev;
  };
  SimplexOptions opt;
  opt.initial_step = 0.2;
  opt.max_evaluations = 40000;
  opt.x_tolerance = 1e-9;
  const SimplexResult r =
      minimize_simplex(deviance, {std::log(a0), std::log(14.0), std::log(14.0), std::sqrt(c0)}, opt);
  return {std::exp(r.x[1]), std::exp(r.x[2]), std::exp(r.x[0]), r.x[3] * r.x[3], r.value};
}

double CountsTable::total() const {
  double t = 0.0;
  for (const auto& r : rows) t += r.counts;
  return t;
}

double CountsTable::total_background() const {
  double t = 0.0;
  for (const auto& r : rows) t += r.background;
  return t;
}

std::vector<ProjectionSetting> tomography_settings() {
  static constexpr std::array<Basis, 4> kSet{Basis::H, Basis::V, Basis::D, Basis::R};
  std::vector<ProjectionSetting> out;
  for (Basis a : kSet) {
    for (Basis b : kSet) out.push_back({a, b});
  }
  return out;
}

WindowCounts expected_counts(const ExperimentConfig& config, const ProjectionSetting& setting,
                             double duration_s, const WindowSpec& window, const RunOptions& options) {
  window.validate();
  const ClickProbabilities p = click_probabilities(config, setting, options);
  const auto rates = singles_rates(config, setting, options);
  const double pairs = config.source.pair_rate() * duration_s * config.arm_A.survival() *
                       config.arm_B.survival() * p.both;
  const double half = 0.5 * window.width_ns;
  const double accidental = rates[0] * rates[1] * window.width_ns * 1e-9 * duration_s;
  const double off = window.background_offset_ns;
  return {pairs * wavepacket_mass(-half, half, config.source) + accidental,
          pairs * wavepacket_mass(off - half, off + half, config.source) + accidental};
}

std::vector<CountsTable> counts_tables(const ExperimentConfig& config, double duration_s,
                                       std::uint64_t seed, const std::vector<WindowSpec>& windows,
                                       bool exact, const RunOptions& options) {
  std::vector<CountsTable> tables(windows.size());
  const auto settings = tomography_settings();
  for (std::size_t k = 0; k < settings.size(); ++k) {
    if (exact) {
      for (std::size_t w = 0; w < windows.size(); ++w) {
        const WindowCounts c = expected_counts(config, settings[k], duration_s, windows[w], options);
        tables[w].rows.push_back({settings[k], c.signal, c.background});
      }
      continue;
    }
    const SimulatedRun run = simulate_run(config, settings[k], duration_s, derive_seed(seed, k), options);
    const auto counts = counts_in_windows(run.a, run.b, windows);
    for (std::size_t w = 0; w < windows.size(); ++w) {
      tables[w].rows.push_back({settings[k], counts[w].signal, counts[w].background});
    }
  }
  return tables;
}

CountsTable counts_table(const ExperimentConfig& config, double duration_s, std::uint64_t seed,
                         const WindowSpec& window, bool exact, const RunOptions& options) {
  return counts_tables(config, duration_s, seed, {window}, exact, options).front();
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void write_time_tags_csv(std::ostream& out, const TimeTagStream& a, const TimeTagStream& b) {
  require_sorted(a);
  require_sorted(b);
  out << "time_ps,detector\n";
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.tags.size() || j < b.tags.size()) {
    const bool take_a = j >= b.tags.size() || (i < a.tags.size() && a.tags[i].time_ps <= b.tags[j].time_ps);
    const TimeTag& t = take_a ? a.tags[i++] : b.tags[j++];
    out << t.time_ps << ',' << static_cast<int>(t.detector) << '\n';
  }
}

std::vector<TimeTagStream> read_time_tags_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "time_ps,detector") {
    throw std::invalid_argument("time-tag CSV must start with the header 'time_ps,detector'");
  }
  std::vector<TimeTagStream> streams;
  std::int64_t last = std::numeric_limits<std::int64_t>::min();
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    std::int64_t t = 0;
    int det = 0;
    try {
      if (f.size() != 2) throw std::invalid_argument("field count");
      std::size_t used = 0;
      t = std::stoll(f[0], &used);
      if (used != f[0].size()) throw std::invalid_argument("time");
      det = std::stoi(f[1], &used);
      if (used != f[1].size() || det < 0 || det > 255) throw std::invalid_argument("detector");
    } catch (const std::exception&) {
      throw std::invalid_argument("time-tag CSV line " + std::to_string(line_no) + ": malformed row");
    }
    if (t < 0 || t < last) {
      throw std::invalid_argument("time-tag CSV line " + std::to_string(line_no) +
                                  ": times must be non-negative and ascending");
    }
    last = t;
    while (streams.size() <= static_cast<std::size_t>(det)) {
      streams.emplace_back();
      streams.back().detector = static_cast<std::uint8_t>(streams.size() - 1);
    }
    streams[static_cast<std::size_t>(det)].tags.push_back({t, static_cast<std::uint8_t>(det), TagOrigin::Pair});
  }
  return streams;
}

void write_counts_csv(std::ostream& out, const CountsTable& table) {
  const bool with_bg = table.total_background() > 0.0;
  out << (with_bg ? "basis_A,basis_B,counts,background\n" : "basis_A,basis_B,counts\n");
  out.precision(17);
  for (const auto& r : table.rows) {
    out << basis_symbol(r.setting.a) << ',' << basis_symbol(r.setting.b) << ',' << r.counts;
    if (with_bg) out << ',' << r.background;
    out << '\n';
  }
}

CountsTable read_counts_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("counts CSV is empty");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "basis_A" || header[1] != "basis_B" || header[2] != "counts") {
    throw std::invalid_argument("counts CSV must start with the header 'basis_A,basis_B,counts'");
  }
  const bool has_bg = header.size() == 4 && header[3] == "background";
  CountsTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    try {
      if (f.size() != header.size()) throw std::invalid_argument("field count");
      CountsRow row;
      row.setting = {parse_basis(f[0]), parse_basis(f[1])};
      row.counts = std::stod(f[2]);
      if (has_bg) row.background = std::stod(f[3]);
      if (!(row.counts >= 0.0) || !(row.background >= 0.0)) throw std::invalid_argument("negative");
      table.rows.push_back(row);
    } catch (const std::exception&) {
      throw std::invalid_argument("counts CSV line " + std::to_string(line_no) + ": malformed row");
    }
  }
  return table;
}

}  // namespace qfclink
