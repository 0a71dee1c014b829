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

#include "qfclink/coupling_optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <thread>

#include "qfclink/simplex.hpp"

namespace qfclink {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kStarts = 8;

double wavelength_mm(double nm) { return nm * 1e-6; }

}  // namespace

GaussianBeam GaussianBeam::from_waist(double wavelength_nm, double waist_um, double distance_from_waist_mm) {
  if (!(wavelength_nm > 0.0) || !(waist_um > 0.0)) {
    throw std::invalid_argument("GaussianBeam: wavelength and waist must be positive");
  }
  const double w0 = waist_um * 1e-3;
  const double z_r = kPi * w0 * w0 / wavelength_mm(wavelength_nm);
  return {wavelength_nm, {distance_from_waist_mm, z_r}};
}

double GaussianBeam::waist_um() const {
  return std::sqrt(rayleigh_range_mm() * wavelength_mm(wavelength_nm) / kPi) * 1e3;
}

double GaussianBeam::radius_um() const {
  const double z = z_offset_mm() / rayleigh_range_mm();
  return waist_um() * std::sqrt(1.0 + z * z);
}

double GaussianBeam::inverse_curvature_per_mm() const { return (1.0 / q).real(); }

OpticalElement OpticalElement::free_space(double d_mm, int variable) {
  OpticalElement e;
  e.kind = OpticalKind::FreeSpace;
  e.distance_mm = d_mm;
  e.variable = variable;
  return e;
}

OpticalElement OpticalElement::lens(std::vector<std::pair<double, double>> focal_table) {
  if (focal_table.empty()) throw std::invalid_argument("lens: empty focal-length table");
  for (const auto& [lambda, f] : focal_table) {
    if (f == 0.0 || !std::isfinite(f)) throw std::invalid_argument("lens: focal length must be finite and nonzero");
  }
  std::sort(focal_table.begin(), focal_table.end());
  OpticalElement e;
  e.kind = OpticalKind::ThinLens;
  e.focal_table = std::move(focal_table);
  return e;
}

OpticalElement OpticalElement::lens(double f_mm) { return lens({{0.0, f_mm}}); }

double OpticalElement::focal_length_mm(double wavelength_nm) const {
  const auto& t = focal_table;
  if (t.size() == 1 || wavelength_nm <= t.front().first) return t.front().second;
  if (wavelength_nm >= t.back().first) return t.back().second;
  const auto hi = std::lower_bound(t.begin(), t.end(), std::pair{wavelength_nm, -1e300});
  const auto lo = hi - 1;
  const double s = (wavelength_nm - lo->first) / (hi->first - lo->first);
  return lo->second + s * (hi->second - lo->second);
}

Eigen::Matrix2d abcd(const OpticalTrain& train, double wavelength_nm) {
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  for (const auto& e : train.elements) {
    Eigen::Matrix2d step;
    if (e.kind == OpticalKind::FreeSpace) {
      if (e.distance_mm < 0.0) throw std::invalid_argument("free-space distance must be non-negative");
      step << 1.0, e.distance_mm, 0.0, 1.0;
    } else {
      const double f = e.focal_length_mm(wavelength_nm);
      if (f == 0.0 || !std::isfinite(f)) throw std::invalid_argument("lens focal length must be nonzero");
      step << 1.0, 0.0, -1.0 / f, 1.0;
    }
    m = step * m;
  }
  return m;
}

GaussianBeam propagate(const GaussianBeam& beam, const OpticalTrain& train) {
  const Eigen::Matrix2d m = abcd(train, beam.wavelength_nm);
  const std::complex<double> q = (m(0, 0) * beam.q + m(0, 1)) / (m(1, 0) * beam.q + m(1, 1));
  if (!(q.imag() > 0.0) || !std::isfinite(q.real())) {
    throw std::domain_error("propagate: beam parameter left the physical half plane");
  }
  return {beam.wavelength_nm, q};
}

OpticalTrain bind_distances(const OpticalTrain& train, const std::vector<double>& x) {
  OpticalTrain out = train;
  for (auto& e : out.elements) {
    if (e.kind != OpticalKind::FreeSpace || e.variable < 0) continue;
    if (static_cast<std::size_t>(e.variable) >= x.size()) {
      throw std::invalid_argument("optical train refers to an unknown distance variable");
    }
    e.distance_mm = x[static_cast<std::size_t>(e.variable)];
  }
  return out;
}

double mode_overlap(const GaussianBeam& a, const GaussianBeam& b) {
  if (std::abs(a.wavelength_nm - b.wavelength_nm) > 1e-9 * a.wavelength_nm) {
    throw std::invalid_argument("mode_overlap: wavelengths differ");
  }
  const double w1 = a.radius_um() * 1e-3;
  const double w2 = b.radius_um() * 1e-3;
  const double ratio = w1 / w2 + w2 / w1;
  const double phase = kPi * w1 * w2 / wavelength_mm(a.wavelength_nm) *
                       (a.inverse_curvature_per_mm() - b.inverse_curvature_per_mm());
  return 4.0 / (ratio * ratio + phase * phase);
}

double mode_overlap(const GaussianBeam& beam, const ModeTarget& target) {
  return mode_overlap(beam, GaussianBeam::from_waist(target.wavelength_nm, target.waist_um));
}

double coupling_objective(const CouplingProblem& problem, const std::vector<double>& distances_mm) {
  double total = 0.0;
  for (const auto& p : problem.paths) {
    total += p.weight * mode_overlap(propagate(p.input, bind_distances(p.train, distances_mm)), p.target);
  }
  return total;
}

CouplingResult optimize_distances(const CouplingProblem& problem, int threads) {
  const std::size_t n = problem.lower_mm.size();
  if (n == 0 || problem.upper_mm.size() != n) throw std::invalid_argument("optimize_distances: bounds are empty");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(problem.lower_mm[i] >= 0.0) || !(problem.lower_mm[i] <= problem.upper_mm[i])) {
      throw std::invalid_argument("optimize_distances: infeasible bounds");
    }
  }
  if (problem.paths.empty()) throw std::invalid_argument("optimize_distances: no paths");
  for (const auto& p : problem.paths) {
    if (!(p.weight >= 0.0)) throw std::invalid_argument("optimize_distances: weights must be non-negative");
    for (const auto& e : p.train.elements) {
      if (e.variable >= static_cast<int>(n)) throw std::invalid_argument("optimize_distances: variable out of range");
    }
  }

  auto unscale = [&](std::span<const double> u) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = problem.lower_mm[i] + std::clamp(u[i], 0.0, 1.0) * (problem.upper_mm[i] - problem.lower_mm[i]);
    }
    return x;
  };
  auto objective = [&](std::span<const double> u) {
    try {
      return -coupling_objective(problem, unscale(u));
    } catch (const std::domain_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  // Latin grid: coordinate i of start s sits in stratum (s (2i+1) + 3i) mod 8,
  // a permutation of the strata for every coordinate.
  std::vector<std::vector<double>> starts(kStarts, std::vector<double>(n));
  for (int s = 0; s < kStarts; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto stratum = (static_cast<std::size_t>(s) * (2 * i + 1) + 3 * i) % kStarts;
      starts[static_cast<std::size_t>(s)][i] = (static_cast<double>(stratum) + 0.5) / kStarts;
    }
  }

  SimplexOptions opt;
  opt.initial_step = 0.05;
  opt.max_evaluations = 20000;
  opt.f_tolerance = 1e-14;
  opt.x_tolerance = 1e-10;
  const Box unit{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};

  std::vector<SimplexResult> results(kStarts);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int s = next++; s < kStarts; s = next++) {
      results[static_cast<std::size_t>(s)] = minimize_simplex(objective, starts[static_cast<std::size_t>(s)], opt, unit);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::clamp(threads, 1, kStarts); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  CouplingResult out;
  std::size_t best = 0;
  for (std::size_t s = 0; s < results.size(); ++s) {
    if (results[s].value < results[best].value) best = s;
    out.start_points_mm.push_back(unscale(starts[s]));
    out.start_objectives.push_back(-objective(starts[s]));
  }
  out.distances_mm = unscale(results[best].x);
  out.objective = coupling_objective(problem, out.distances_mm);
  for (const auto& p : problem.paths) {
    out.efficiencies.push_back(mode_overlap(propagate(p.input, bind_distances(p.train, out.distances_mm)), p.target));
  }
  return out;
}

nlohmann::json coupling_report(const CouplingProblem& problem, const CouplingResult& result) {
  nlohmann::json paths = nlohmann::json::array();
  for (std::size_t i = 0; i < problem.paths.size(); ++i) {
    paths.push_back({{"name", problem.paths[i].name},
                     {"wavelength_nm", problem.paths[i].input.wavelength_nm},
                     {"weight", problem.paths[i].weight},
                     {"efficiency", result.efficiencies[i]}});
  }
  return {{"distances_mm", result.distances_mm}, {"objective", result.objective}, {"paths", paths}};
}

}  // namespace qfclink
