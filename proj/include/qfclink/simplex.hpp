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

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace qfclink {

struct SimplexOptions {
  int max_evaluations = 20000;
  /// Stop when the spread of function values across the simplex drops below this.
  double f_tolerance = 1e-13;
  /// ... and the simplex diameter drops below this.
  double x_tolerance = 1e-10;
  /// Initial edge length along each coordinate.
  double initial_step = 0.1;
  /// Restart around the best vertex this many times after convergence, which
  /// shakes the simplex out of premature collapse.
  int restarts = 2;
};

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead minimization. When `box` is given, every trial vertex is
/// clamped into it, so the returned point always satisfies the bounds.
SimplexResult minimize_simplex(const Objective& f, std::vector<double> start,
                               const SimplexOptions& options = {},
                               const std::optional<Box>& box = std::nullopt);

}  // namespace qfclink
