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

#include "qfclink/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qfclink {

namespace {

namespace fs = std::filesystem;

std::string num(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string point_dir_name(Setup s, double pump) {
  return std::string(1, setup_tag(s)) + "_" + num(pump) + "mw";
}

// exp(-i theta/2 n.sigma) for rotation vector v = theta n.
Unitary2 su2_rotation(double x, double y, double z) {
  const double theta = std::sqrt(x * x + y * y + z * z);
  if (theta == 0.0) return Unitary2::identity();
  const std::complex<double> i(0.0, 1.0);
  const Matrix2c gen = (x * pauli(1) + y * pauli(2) + z * pauli(3)) / theta;
  return Unitary2(std::cos(0.5 * theta) * Matrix2c::Identity() - i * std::sin(0.5 * theta) * gen);
}

ArmCalibration calibrate_arm(const ArmConfig& arm, const Unitary2& drift, int shots, bool exact,
                             std::uint64_t seed, double minute) {
  PolarizationChannel ch = chain_polarization_channel(arm.chain);
  ch.unitary = drift * ch.unitary;
  auto measured = [&](Basis b, std::uint64_t s) {
    const Matrix2c out = ch.apply(projector_matrix(b));
    const auto counts = qubit_counts(out, static_cast<double>(shots),
                                     exact ? std::nullopt : std::optional<std::uint64_t>(s));
    return mle_single_qubit(counts);
  };
  const CalibrationResult r =
      calibrate_rotation(measured(Basis::H, derive_seed(seed, 0)), measured(Basis::R, derive_seed(seed, 1)));
  ArmCalibration c;
  c.estimate = r.rotation;
  c.truth = ch.unitary;
  c.unitary_fidelity = unitary_fidelity(r.rotation, ch.unitary);
  c.low_purity_warning = r.low_purity_warning;
  c.minute = minute;
  return c;
}

// HH, HV, VH, VV form the one complete analyzer basis among the settings,
// so their sum sees every pair exactly once.
bool hv_setting(const ProjectionSetting& s) {
  auto hv = [](Basis b) { return b == Basis::H || b == Basis::V; };
  return hv(s.a) && hv(s.b);
}

std::vector<double> scan_windows_tau() {
  std::vector<double> out;
  for (int i = 1; i <= 24; ++i) out.push_back(0.25 * i);
  return out;
}

nlohmann::json unitary_json(const Unitary2& u) { return matrix_to_json(u.matrix()); }

nlohmann::json calibration_json(const ArmCalibration& c) {
  return {{"minute", c.minute},
          {"unitary_fidelity", c.unitary_fidelity},
          {"low_purity_warning", c.low_purity_warning},
          {"estimate", unitary_json(c.estimate)},
          {"truth", unitary_json(c.truth)}};
}

void write_point_artifacts(const GridPointResult& p, const std::string& out_dir) {
  const fs::path dir = fs::path(out_dir) / "points" / point_dir_name(p.setup, p.pump_mW);
  fs::create_directories(dir);
  write_file_atomic((dir / "chain.json").string(), p.chain.dump(2) + "\n");
  nlohmann::json cal = {{"arm_A", nlohmann::json::array()}, {"arm_B", calibration_json(p.calibration_B)}};
  for (const auto& c : p.calibrations_A) cal["arm_A"].push_back(calibration_json(c));
  write_file_atomic((dir / "calibration.json").string(), cal.dump(2) + "\n");
  for (const auto& w : p.windows) {
    const std::string tag = "w" + num(w.window_tau);
    std::ostringstream counts;
    write_counts_csv(counts, w.counts);
    write_file_atomic((dir / ("counts_" + tag + ".csv")).string(), counts.str());
    const nlohmann::json rho = {{"window_tau", w.window_tau},
                                {"rho", to_json(w.rho)},
                                {"rho_background_corrected", to_json(w.rho_bg_corrected)}};
    write_file_atomic((dir / ("rho_" + tag + ".json")).string(), rho.dump(2) + "\n");
    std::ostringstream results;
    write_results_csv(results, {{"fidelity", w.fidelity, w.fidelity_sigma},
                                {"fidelity_background_corrected", w.fidelity_bg_corrected, 0.0},
                                {"purity", w.purity, w.purity_sigma},
                                {"sbr", w.sbr.sbr, w.sbr.sigma},
                                {"coincidence_rate_per_s", w.coincidence_rate, w.coincidence_rate_sigma}});
    write_file_atomic((dir / ("results_" + tag + ".csv")).string(), results.str());
  }
}

std::uint64_t point_seed(std::uint64_t master, Setup s, double pump) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(setup_tag(s))), std::bit_cast<std::uint64_t>(pump));
}

}  // namespace

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Simulated: return "simulated";
    case Provenance::Expected: return "expected";
    case Provenance::Analytic: return "analytic";
  }
  return "unknown";
}

bool RunReport::ok() const { return failures().empty(); }

std::vector<std::string> RunReport::failures() const {
  std::vector<std::string> out;
  for (const auto& p : points) {
    if (!p.ok) out.push_back(point_dir_name(p.setup, p.pump_mW) + ": " + p.error);
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

GridPointResult run_grid_point(const ScenarioConfig& config, Setup setup, double pump_mW, bool exact,
                               double duration_s, std::uint64_t seed, int threads, const std::string& tags_dir) {
  GridPointResult point;
  point.setup = setup;
  point.pump_mW = pump_mW;
  point.exact = exact;
  point.duration_per_setting_s = duration_s;

  const ExperimentConfig cfg = config.experiment(setup, pump_mW);
  const auto settings = tomography_settings();
  const std::size_t n_settings = settings.size();
  const double tau = cfg.source.tau_mean_ns();
  const double offset = cfg.tomography.background_offset_ns;
  const PureState2 target = source_state(cfg.source);

  std::vector<WindowSpec> specs;
  for (double w : config.windows_tau) specs.push_back({w * tau, offset});
  const auto scan = scan_windows_tau();
  for (double w : scan) specs.push_back({w * tau, offset});

  // Drift random walk and calibration epochs along the acquisition timeline.
  std::vector<Unitary2> drift(n_settings, Unitary2::identity());
  std::vector<double> minute(n_settings);
  {
    std::mt19937_64 engine(derive_seed(seed, 3));
    std::normal_distribution<double> normal;
    const double step = cfg.drift_rad_per_sqrt_min * std::sqrt(duration_s / 60.0);
    Unitary2 d = Unitary2::identity();
    for (std::size_t k = 0; k < n_settings; ++k) {
      minute[k] = static_cast<double>(k) * duration_s / 60.0;
      if (k > 0 && step > 0.0) {
        const double x = normal(engine) * step;
        const double y = normal(engine) * step;
        const double z = normal(engine) * step;
        d = su2_rotation(x, y, z) * d;
      }
      drift[k] = d;
    }
  }
  const double cadence = cfg.calibration_cadence_min;
  std::vector<std::size_t> epoch_of(n_settings, 0);
  const int shots = cfg.tomography.calibration_shots;
  point.calibrations_A.push_back(calibrate_arm(cfg.arm_A, drift[0], shots, exact, derive_seed(seed, 1), 0.0));
  point.calibration_B = calibrate_arm(cfg.arm_B, Unitary2::identity(), shots, exact, derive_seed(seed, 2), 0.0);
  for (std::size_t k = 1; k < n_settings; ++k) {
    const bool new_epoch = cadence > 0.0 && std::floor(minute[k] / cadence) > std::floor(minute[k - 1] / cadence);
    if (new_epoch) {
      point.calibrations_A.push_back(calibrate_arm(cfg.arm_A, drift[k], shots, exact,
                                                   derive_seed(seed, 100 + k), minute[k]));
    }
    epoch_of[k] = point.calibrations_A.size() - 1;
  }

  // Acquisition.
  const double bin = cfg.tomography.bin_ns;
  const double range = cfg.tomography.histogram_range_ns;
  point.delays.bin_ns = bin;
  point.delays.range_ns = range;
  std::vector<std::vector<WindowCounts>> counts(n_settings);
  const std::uint64_t sim_seed = derive_seed(seed, 0);
  for (std::size_t k = 0; k < n_settings; ++k) {
    RunOptions opts;
    opts.drift_A = drift[k];
    if (exact) {
      for (const auto& spec : specs) counts[k].push_back(expected_counts(cfg, settings[k], duration_s, spec, opts));
      const ClickProbabilities p = click_probabilities(cfg, settings[k], opts);
      const auto rates = singles_rates(cfg, settings[k], opts);
      const double pairs =
          cfg.source.pair_rate() * duration_s * cfg.arm_A.survival() * cfg.arm_B.survival() * p.both;
      const double acc = rates[0] * rates[1] * bin * 1e-9 * duration_s;
      const auto n_bins = static_cast<std::size_t>(std::llround(2.0 * range / bin));
      point.delays.counts.resize(n_bins, 0.0);
      for (std::size_t i = 0; i < n_bins; ++i) {
        const double lo = -range + static_cast<double>(i) * bin;
        point.delays.counts[i] += pairs * wavepacket_mass(lo, lo + bin, cfg.source) + acc;
      }
      continue;
    }
    const SimulatedRun run = simulate_run(cfg, settings[k], duration_s, derive_seed(sim_seed, k), opts);
    counts[k] = counts_in_windows(run.a, run.b, specs);
    const CoincidenceHistogram h = histogram(run.a, run.b, bin, range);
    point.delays.counts.resize(h.counts.size(), 0.0);
    for (std::size_t i = 0; i < h.counts.size(); ++i) point.delays.counts[i] += static_cast<double>(h.counts[i]);
    if (!tags_dir.empty()) {
      std::ostringstream out;
      write_time_tags_csv(out, run.a, run.b);
      write_file_atomic((fs::path(tags_dir) / ("tags_" + settings[k].label() + ".csv")).string(), out.str());
    }
  }

  MleOptions mle_opts;
  mle_opts.max_iterations = cfg.tomography.max_iterations;
  mle_opts.tolerance = cfg.tomography.tolerance;

  for (std::size_t w = 0; w < config.windows_tau.size(); ++w) {
    WindowResult r;
    r.window_tau = config.windows_tau[w];
    r.window_ns = specs[w].width_ns;
    std::vector<Measurement> data;
    std::vector<Measurement> corrected;
    double signal = 0.0;
    double background = 0.0;
    double hv = 0.0;
    double hv_expected = 0.0;
    for (std::size_t k = 0; k < n_settings; ++k) {
      const WindowCounts& c = counts[k][w];
      r.counts.rows.push_back({settings[k], c.signal, c.background});
      const Matrix4c effect = analyzer_projector(settings[k], point.calibrations_A[epoch_of[k]].estimate.adjoint(),
                                                 point.calibration_B.estimate.adjoint());
      data.push_back({effect, c.signal});
      corrected.push_back({effect, std::max(0.0, c.signal - c.background)});
      if (hv_setting(settings[k])) {
        signal += c.signal;
        background += c.background;
        hv += c.signal;
        hv_expected += expected_counts(cfg, settings[k], duration_s, specs[w]).signal;
      }
    }
    const MLEResult mle = mle_reconstruct(data, mle_opts);
    if (!mle.converged) throw std::runtime_error("MLE did not converge for window " + num(r.window_tau));
    r.rho = mle.rho;
    r.mle_iterations = mle.iterations;
    const FidelityPurity fp = fidelity_and_purity(mle, target);
    r.fidelity = fp.fidelity;
    r.purity = fp.purity;
    const MLEResult mle_bg = mle_reconstruct(corrected, mle_opts);
    r.rho_bg_corrected = mle_bg.rho;
    r.fidelity_bg_corrected = fidelity(mle_bg.rho, target);
    if (!exact) {
      const ErrorEstimate e = monte_carlo_errors(data, cfg.tomography.mc_resamples, derive_seed(seed, 10 + w), target,
                                                 threads);
      r.fidelity_sigma = e.fidelity_sigma;
      r.purity_sigma = e.purity_sigma;
    }
    r.sbr = estimate_sbr(signal, background);
    r.sbr_analytic = analytic_sbr(r.window_ns, cfg.source);
    r.fidelity_ceiling = fidelity_ceiling(r.sbr_analytic, 1.0);
    r.coincidence_rate = hv / duration_s;
    r.coincidence_rate_sigma = exact ? 0.0 : std::sqrt(hv) / duration_s;
    r.coincidence_rate_expected = hv_expected / duration_s;
    if (!std::isfinite(r.fidelity) || !std::isfinite(r.sbr.sbr)) {
      throw std::runtime_error("non-finite fidelity or SBR for window " + num(r.window_tau));
    }
    point.windows.push_back(std::move(r));
  }

  for (std::size_t i = 0; i < scan.size(); ++i) {
    WindowScanRow row;
    row.window_tau = scan[i];
    for (std::size_t k = 0; k < n_settings; ++k) {
      if (!hv_setting(settings[k])) continue;
      row.signal += counts[k][config.windows_tau.size() + i].signal;
      row.background += counts[k][config.windows_tau.size() + i].background;
    }
    row.sbr_analytic = analytic_sbr(scan[i] * tau, cfg.source);
    point.window_scan.push_back(row);
  }

  point.chain = {{"setup", std::string(1, setup_tag(setup))},
                 {"pump_mw", pump_mW},
                 {"arm_A", {{"chain", chain_report(cfg.arm_A.chain)},
                            {"port_efficiency", cfg.arm_A.port_efficiency},
                            {"detection_transmission", cfg.arm_A.detection_transmission},
                            {"detector_efficiency", cfg.arm_A.detector.efficiency},
                            {"survival", cfg.arm_A.survival()},
                            {"noise_rate_at_detector_per_s", cfg.arm_A.noise_rate_at_detector()}}},
                 {"arm_B", {{"chain", chain_report(cfg.arm_B.chain)},
                            {"port_efficiency", cfg.arm_B.port_efficiency},
                            {"detection_transmission", cfg.arm_B.detection_transmission},
                            {"detector_efficiency", cfg.arm_B.detector.efficiency},
                            {"survival", cfg.arm_B.survival()},
                            {"noise_rate_at_detector_per_s", cfg.arm_B.noise_rate_at_detector()}}}};
  point.ok = true;
  return point;
}

RunReport run_scenario(const ScenarioConfig& config, const RunFlags& flags, const ProgressFn& progress) {
  RunReport report;
  report.source = config.link.source.value_or(SourceParams{});
  report.converter = config.link.converter.value_or(ConverterParams::calibrated());
  const bool exact = flags.exact.value_or(config.exact);
  const std::uint64_t seed = flags.seed.value_or(config.seed);
  if (flags.duration_s && !(*flags.duration_s > 0.0)) {
    throw std::invalid_argument("run_scenario: duration must be positive");
  }

  for (Setup s : config.setups) {
    for (double p : config.pump_powers_mW) {
      GridPointResult g;
      g.setup = s;
      g.pump_mW = p;
      report.points.push_back(std::move(g));
    }
  }
  const int n = static_cast<int>(report.points.size());
  const int workers = std::clamp(config.parallelism, 1, std::max(1, n));
  const int inner = std::max(1, config.parallelism / workers);
  std::mutex log_mutex;
  std::atomic<int> next{0};

  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      GridPointResult& slot = report.points[static_cast<std::size_t>(i)];
      const Setup s = slot.setup;
      const double p = slot.pump_mW;
      const std::string name = point_dir_name(s, p);
      try {
        std::string tags_dir;
        if (flags.export_tags && !flags.out_dir.empty()) {
          tags_dir = (fs::path(flags.out_dir) / "points" / name / "tags").string();
        }
        const double duration = flags.duration_s.value_or(config.duration_s(s));
        slot = run_grid_point(config, s, p, exact, duration, point_seed(seed, s, p), inner, tags_dir);
        if (!flags.out_dir.empty()) write_point_artifacts(slot, flags.out_dir);
      } catch (const std::exception& e) {
        slot = GridPointResult{};
        slot.setup = s;
        slot.pump_mW = p;
        slot.ok = false;
        slot.error = e.what();
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(log_mutex);
        progress(name + (slot.ok ? ": done" : ": FAILED: " + slot.error));
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (config.coupling) {
    report.coupling_problem = config.coupling;
    report.coupling = optimize_distances(*config.coupling, config.parallelism);
    if (progress) progress("coupling: objective " + num(report.coupling->objective, 6));
  }

  if (!flags.out_dir.empty()) {
    std::ostringstream csv;
    write_report_csv(csv, report);
    write_file_atomic((fs::path(flags.out_dir) / "report.csv").string(), csv.str());
    write_file_atomic((fs::path(flags.out_dir) / "report.json").string(), report_json(report).dump(2) + "\n");
    if (report.coupling) {
      write_file_atomic((fs::path(flags.out_dir) / "coupling.json").string(),
                        coupling_report(*report.coupling_problem, *report.coupling).dump(2) + "\n");
    }
  }
  return report;
}

RunReport run_scenario(const std::string& config_path, const RunFlags& flags, const ProgressFn& progress) {
  return run_scenario(load_config(config_path), flags, progress);
}

void write_report_csv(std::ostream& out, const RunReport& report) {
  out << "setup,pump_mw,window_tau,quantity,value,sigma,provenance\n";
  for (const auto& p : report.points) {
    if (!p.ok) continue;
    const Provenance sim = p.exact ? Provenance::Expected : Provenance::Simulated;
    const std::string head = std::string(1, setup_tag(p.setup)) + "," + num(p.pump_mW) + ",";
    auto row = [&](const std::string& window, const std::string& q, double v, double s, Provenance prov) {
      out << head << window << ',' << q << ',' << num(v) << ',' << num(s) << ',' << provenance_name(prov) << '\n';
    };
    for (const auto& w : p.windows) {
      const std::string wt = num(w.window_tau);
      row(wt, "fidelity", w.fidelity, w.fidelity_sigma, sim);
      row(wt, "fidelity_background_corrected", w.fidelity_bg_corrected, 0.0, sim);
      row(wt, "purity", w.purity, w.purity_sigma, sim);
      row(wt, "sbr", w.sbr.sbr, w.sbr.sigma, sim);
      row(wt, "coincidence_rate_per_s", w.coincidence_rate, w.coincidence_rate_sigma, sim);
      row(wt, "coincidence_rate_expected_per_s", w.coincidence_rate_expected, 0.0, Provenance::Expected);
      row(wt, "sbr_analytic", w.sbr_analytic, 0.0, Provenance::Analytic);
      row(wt, "fidelity_ceiling", w.fidelity_ceiling, 0.0, Provenance::Analytic);
    }
    row("", "calibration_unitary_fidelity_A", p.calibrations_A.front().unitary_fidelity, 0.0, sim);
    row("", "calibration_unitary_fidelity_B", p.calibration_B.unitary_fidelity, 0.0, sim);
  }
}

nlohmann::json report_json(const RunReport& report) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : report.points) {
    nlohmann::json j = {{"setup", std::string(1, setup_tag(p.setup))}, {"pump_mw", p.pump_mW}, {"ok", p.ok}};
    if (!p.ok) {
      j["error"] = p.error;
      points.push_back(j);
      continue;
    }
    const std::string dir = "points/" + point_dir_name(p.setup, p.pump_mW) + "/";
    j["exact"] = p.exact;
    j["duration_per_setting_s"] = p.duration_per_setting_s;
    j["calibrations_A"] = p.calibrations_A.size();
    j["windows"] = nlohmann::json::array();
    for (const auto& w : p.windows) {
      const std::string tag = "w" + num(w.window_tau);
      j["windows"].push_back({{"window_tau", w.window_tau},
                              {"window_ns", w.window_ns},
                              {"fidelity", w.fidelity},
                              {"fidelity_sigma", w.fidelity_sigma},
                              {"fidelity_background_corrected", w.fidelity_bg_corrected},
                              {"purity", w.purity},
                              {"purity_sigma", w.purity_sigma},
                              {"sbr", w.sbr.sbr},
                              {"sbr_sigma", w.sbr.sigma},
                              {"sbr_analytic", w.sbr_analytic},
                              {"fidelity_ceiling", w.fidelity_ceiling},
                              {"coincidence_rate_per_s", w.coincidence_rate},
                              {"mle_iterations", w.mle_iterations},
                              {"density_matrix", dir + "rho_" + tag + ".json"},
                              {"counts", dir + "counts_" + tag + ".csv"}});
    }
    points.push_back(j);
  }
  nlohmann::json out = {{"points", points}, {"ok", report.ok()}};
  if (report.coupling) out["coupling"] = coupling_report(*report.coupling_problem, *report.coupling);
  return out;
}

namespace {

const GridPointResult& wavepacket_point(const RunReport& report) {
  const GridPointResult* best = nullptr;
  for (const auto& p : report.points) {
    if (!p.ok || p.delays.counts.empty()) continue;
    const bool better = !best || (p.setup == Setup::A && best->setup != Setup::A) ||
                        (p.setup == best->setup && p.pump_mW > best->pump_mW);
    if (better) best = &p;
  }
  if (!best) throw std::runtime_error("wavepacket: the report has no successful grid point");
  return *best;
}

std::string figure_wavepacket(const RunReport& report) {
  const GridPointResult& p = wavepacket_point(report);
  CoincidenceHistogram h;
  h.bin_ns = p.delays.bin_ns;
  h.range_ns = p.delays.range_ns;
  for (double c : p.delays.counts) h.counts.push_back(static_cast<std::uint64_t>(std::llround(c)));
  const WavepacketFit fit = fit_wavepacket(h);
  SourceParams model = report.source;
  model.tau_H_ns = fit.tau_H_ns;
  model.tau_V_ns = fit.tau_V_ns;
  std::ostringstream out;
  out << "setup,pump_mw,delay_ns,counts,fit_counts,fit_tau_h_ns,fit_tau_v_ns\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const double lo = h.bin_lower_ns(i);
    const double m = fit.amplitude * wavepacket_mass(lo, lo + h.bin_ns, model) + fit.offset;
    out << setup_tag(p.setup) << ',' << num(p.pump_mW) << ',' << num(lo + 0.5 * h.bin_ns) << ','
        << num(p.delays.counts[i]) << ',' << num(m) << ',' << num(fit.tau_H_ns) << ',' << num(fit.tau_V_ns) << '\n';
  }
  return out.str();
}

void require_points(const RunReport& report, const char* figure) {
  for (const auto& p : report.points) {
    if (p.ok) return;
  }
  throw std::runtime_error(std::string(figure) + ": the report has no successful grid point");
}

std::string figure_sbr_vs_window(const RunReport& report) {
  require_points(report, "sbr_vs_window");
  std::ostringstream out;
  out << "setup,pump_mw,window_tau,signal,background,sbr,sbr_sigma,sbr_analytic,provenance\n";
  for (const auto& p : report.points) {
    if (!p.ok) continue;
    for (const auto& r : p.window_scan) {
      const SbrEstimate e = estimate_sbr(r.signal, r.background);
      out << setup_tag(p.setup) << ',' << num(p.pump_mW) << ',' << num(r.window_tau) << ',' << num(r.signal) << ','
          << num(r.background) << ',' << num(e.sbr) << ',' << num(e.sigma) << ',' << num(r.sbr_analytic) << ','
          << provenance_name(p.exact ? Provenance::Expected : Provenance::Simulated) << '\n';
    }
  }
  return out.str();
}

std::string figure_efficiency_vs_pump(const RunReport& report) {
  const ConverterParams& c = report.converter;
  std::ostringstream out;
  out << "pump_w,efficiency_h,efficiency_v,total_pump_w,noise_rate_per_s\n";
  for (int i = 0; i <= 150; ++i) {
    const double p = 0.01 * i;
    out << num(p) << ',' << num(conversion_efficiency(p, c, ConverterArm::H)) << ','
        << num(conversion_efficiency(p, c, ConverterArm::V)) << ',' << num(2.0 * p) << ','
        << num(converter_noise_rate(2.0 * p, c)) << '\n';
  }
  return out.str();
}

std::string figure_fidelity_sbr_grid(const RunReport& report) {
  require_points(report, "fidelity_sbr_grid");
  std::ostringstream out;
  out << "setup,pump_mw,window_tau,fidelity,fidelity_sigma,fidelity_background_corrected,purity,purity_sigma,"
         "sbr,sbr_sigma,sbr_analytic,fidelity_ceiling,provenance\n";
  for (const auto& p : report.points) {
    if (!p.ok) continue;
    for (const auto& w : p.windows) {
      out << setup_tag(p.setup) << ',' << num(p.pump_mW) << ',' << num(w.window_tau) << ',' << num(w.fidelity) << ','
          << num(w.fidelity_sigma) << ',' << num(w.fidelity_bg_corrected) << ',' << num(w.purity) << ','
          << num(w.purity_sigma) << ',' << num(w.sbr.sbr) << ',' << num(w.sbr.sigma) << ',' << num(w.sbr_analytic)
          << ',' << num(w.fidelity_ceiling) << ','
          << provenance_name(p.exact ? Provenance::Expected : Provenance::Simulated) << '\n';
    }
  }
  return out.str();
}

std::string figure_cluster(const RunReport& report) {
  std::ostringstream out;
  write_cluster_csv(out, cluster_spectrum(report.source, 5));
  return out.str();
}

std::string figure_rates(const RunReport& report) {
  require_points(report, "rates");
  std::ostringstream out;
  out << "setup,pump_mw,window_tau,coincidence_rate_per_s,sigma,expected_rate_per_s\n";
  for (const auto& p : report.points) {
    if (!p.ok) continue;
    for (const auto& w : p.windows) {
      out << setup_tag(p.setup) << ',' << num(p.pump_mW) << ',' << num(w.window_tau) << ','
          << num(w.coincidence_rate) << ',' << num(w.coincidence_rate_sigma) << ','
          << num(w.coincidence_rate_expected) << '\n';
    }
  }
  return out.str();
}

}  // namespace

std::vector<std::string> emit_figure_data(const RunReport& report, const std::string& which,
                                          const std::string& out_dir) {
  std::vector<std::string> names;
  if (which == "all") {
    names.assign(std::begin(kFigureNames), std::end(kFigureNames));
  } else if (std::find(std::begin(kFigureNames), std::end(kFigureNames), which) != std::end(kFigureNames)) {
    names.push_back(which);
  } else {
    throw std::invalid_argument("unknown figure '" + which + "'");
  }
  // Render everything first so a missing run leaves no partial output.
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& name : names) {
    std::string body;
    if (name == "wavepacket") body = figure_wavepacket(report);
    else if (name == "sbr_vs_window") body = figure_sbr_vs_window(report);
    else if (name == "efficiency_vs_pump") body = figure_efficiency_vs_pump(report);
    else if (name == "fidelity_sbr_grid") body = figure_fidelity_sbr_grid(report);
    else if (name == "cluster") body = figure_cluster(report);
    else body = figure_rates(report);
    files.emplace_back((fs::path(out_dir) / (name + ".csv")).string(), std::move(body));
  }
  std::vector<std::string> written;
  for (const auto& [path, body] : files) {
    write_file_atomic(path, body);
    written.push_back(path);
  }
  return written;
}

}  // namespace qfclink
