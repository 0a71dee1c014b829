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

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace qfclink {

/// Fundamental Gaussian mode, q = z + i z_R with z measured from the waist.
struct GaussianBeam {
  double wavelength_nm = 0.0;
  std::complex<double> q{0.0, 1.0};  // mm

  static GaussianBeam from_waist(double wavelength_nm, double waist_um, double distance_from_waist_mm = 0.0);

  double rayleigh_range_mm() const { return q.imag(); }
  double z_offset_mm() const { return q.real(); }
  /// 1/e^2 intensity radius at the current plane.
  double radius_um() const;
  double waist_um() const;
  /// 1/R in 1/mm; zero at the waist.
  double inverse_curvature_per_mm() const;
};

enum class OpticalKind { FreeSpace, ThinLens };

struct OpticalElement {
  OpticalKind kind = OpticalKind::FreeSpace;
  double distance_mm = 0.0;
  /// Index into the optimization variables; -1 keeps distance_mm fixed.
  int variable = -1;
  /// Tabulated focal length (nm, mm), linearly interpolated in wavelength.
  std::vector<std::pair<double, double>> focal_table;

  static OpticalElement free_space(double d_mm, int variable = -1);
  static OpticalElement lens(std::vector<std::pair<double, double>> focal_table);
  static OpticalElement lens(double f_mm);

  double focal_length_mm(double wavelength_nm) const;
};

struct OpticalTrain {
  std::vector<OpticalElement> elements;
};

/// Composed ray-transfer matrix at a wavelength.
Eigen::Matrix2d abcd(const OpticalTrain& train, double wavelength_nm);

/// q' = (A q + B) / (C q + D). Throws std::domain_error when q leaves the
/// upper half plane and std::invalid_argument for negative distances or zero
/// focal lengths.
GaussianBeam propagate(const GaussianBeam& beam, const OpticalTrain& train);

/// Copy of the train with variable distances taken from x.
OpticalTrain bind_distances(const OpticalTrain& train, const std::vector<double>& x);

/// Waveguide mode with a flat wavefront at the facet.
struct ModeTarget {
  double wavelength_nm = 0.0;
  double waist_um = 0.0;
};

/// Power overlap of two co-axial fundamental modes in the same plane:
/// 4 / ((w1/w2 + w2/w1)^2 + (pi w1 w2 / lambda)^2 (1/R1 - 1/R2)^2).
double mode_overlap(const GaussianBeam& beam, const ModeTarget& target);
double mode_overlap(const GaussianBeam& a, const GaussianBeam& b);

struct CouplingPath {
  std::string name;
  GaussianBeam input;
  OpticalTrain train;
  ModeTarget target;
  double weight = 1.0;
};

struct CouplingProblem {
  std::vector<CouplingPath> paths;
  std::vector<double> lower_mm;
  std::vector<double> upper_mm;
};

struct CouplingResult {
  std::vector<double> distances_mm;
  std::vector<double> efficiencies;
  double objective = 0.0;  // sum of weight * overlap
  std::vector<std::vector<double>> start_points_mm;
  std::vector<double> start_objectives;
};

/// Weighted overlap sum at the given distances.
double coupling_objective(const CouplingProblem& problem, const std::vector<double>& distances_mm);

/// Maximizes sum_i weight_i overlap_i with Nelder-Mead from 8 starts on a
/// bound-scaled Latin grid. Throws std::invalid_argument for negative weights,
/// empty or inverted bounds, or variable indices outside the bounds.
CouplingResult optimize_distances(const CouplingProblem& problem, int threads = 1);

nlohmann::json coupling_report(const CouplingProblem& problem, const CouplingResult& result);

}  // namespace qfclink
