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

#include "qfclink/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qfclink {

namespace {

using Point = std::vector<double>;

void clamp_into(Point& p, const std::optional<Box>& box) {
  if (!box) return;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], box->lower[i], box->upper[i]);
}

struct Run {
  const Objective& f;
  const std::optional<Box>& box;
  int evaluations = 0;

  double eval(Point& p) {
    clamp_into(p, box);
    ++evaluations;
    const double v = f(p);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  }
};

// One Nelder-Mead descent with the standard coefficients (1, 2, 0.5, 0.5).
bool descend(Run& run, std::vector<Point>& simplex, std::vector<double>& values,
             const SimplexOptions& opt) {
  const std::size_t n = simplex.front().size();
  std::vector<std::size_t> order(n + 1);
  while (run.evaluations < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[n - 1];

    double diameter = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        diameter = std::max(diameter, std::abs(simplex[k][i] - simplex[best][i]));
      }
    }
    if (std::abs(values[worst] - values[best]) <= opt.f_tolerance && diameter <= opt.x_tolerance) {
      return true;
    }
    if (diameter <= opt.x_tolerance * 1e-3) return true;

    Point centroid(n, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k][i] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      Point p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + t * (simplex[worst][i] - centroid[i]);
      return p;
    };

    Point reflected = along(-1.0);
    const double fr = run.eval(reflected);
    if (fr < values[best]) {
      Point expanded = along(-2.0);
      const double fe = run.eval(expanded);
      if (fe < fr) {
        simplex[worst] = std::move(expanded);
        values[worst] = fe;
      } else {
        simplex[worst] = std::move(reflected);
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second_worst]) {
      simplex[worst] = std::move(reflected);
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    Point contracted = along(outside ? -0.5 : 0.5);
    const double fc = run.eval(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = std::move(contracted);
      values[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      for (std::size_t i = 0; i < n; ++i) {
        simplex[k][i] = simplex[best][i] + 0.5 * (simplex[k][i] - simplex[best][i]);
      }
      values[k] = run.eval(simplex[k]);
    }
  }
  return false;
}

}  // namespace

SimplexResult minimize_simplex(const Objective& f, std::vector<double> start,
                               const SimplexOptions& options, const std::optional<Box>& box) {
  const std::size_t n = start.size();
  if (n == 0) throw std::invalid_argument("minimize_simplex: empty start point");
  if (box && (box->lower.size() != n || box->upper.size() != n)) {
    throw std::invalid_argument("minimize_simplex: bounds do not match dimension");
  }
  if (box) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(box->lower[i] <= box->upper[i])) throw std::invalid_argument("minimize_simplex: empty box");
    }
  }

  Run run{f, box};
  Point best = std::move(start);
  double best_value = run.eval(best);
  bool converged = false;
  double step = options.initial_step;

  for (int round = 0; round <= options.restarts; ++round) {
    std::vector<Point> simplex{best};
    std::vector<double> values{best_value};
    for (std::size_t i = 0; i < n; ++i) {
      Point p = best;
      double h = step;
      // Step inward when the vertex would land on or past an upper bound.
      if (box && p[i] + h > box->upper[i]) h = -h;
      p[i] += h;
      values.push_back(run.eval(p));
      simplex.push_back(std::move(p));
    }
    converged = descend(run, simplex, values, options);
    const auto it = std::min_element(values.begin(), values.end());
    const auto k = static_cast<std::size_t>(it - values.begin());
    if (values[k] <= best_value) {
      best = simplex[k];
      best_value = values[k];
    }
    if (run.evaluations >= options.max_evaluations) break;
    step *= 0.5;
  }
  return {std::move(best), best_value, run.evaluations, converged};
}

}  // namespace qfclink
