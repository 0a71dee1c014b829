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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfclink/event_simulator.hpp"
#include "qfclink/polarization.hpp"

namespace qfclink {

struct MleOptions {
  int max_iterations = 100000;
  double tolerance = 1e-10;  // max-norm of the rho update
  double probability_floor = 1e-12;
  /// Keep the log-likelihood of every iteration.
  bool record_trace = false;
};

struct MLEResult {
  DensityMatrix rho = DensityMatrix::maximally_mixed(4);
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Number of iterations that fell back to the diluted update.
  int diluted_steps = 0;
  std::vector<double> trace;
};

/// Measurement record for MLE: effect operators with their counts. Used
/// directly when the projectors are calibration-rotated.
struct Measurement {
  MatrixXc effect;
  double counts = 0.0;
};

/// Iterative R rho R maximum likelihood over arbitrary projective effects of
/// dimension 2 or 4. Incomplete effect sets are whitened by the
/// sum of effects before iterating.
MLEResult mle_reconstruct(const std::vector<Measurement>& data, const MleOptions& options = {});
/// Nominal projectors, or the rotate_bases projectors for channel rotations
/// m_A, m_B, which reconstructs the state in front of the channels.
MLEResult mle_reconstruct(const CountsTable& counts, const MleOptions& options = {});
MLEResult mle_reconstruct(const CountsTable& counts, const Unitary2& m_A, const Unitary2& m_B,
                          const MleOptions& options = {});

/// Log-likelihood sum_j n_j log(p_j / sum_k p_k) of rho for the data.
double log_likelihood(const DensityMatrix& rho, const std::vector<Measurement>& data,
                      double probability_floor = 1e-12);

/// Linear inversion through the Pauli expansion (least squares over the
/// effects). The result is Hermitian with unit trace but may be unphysical,
/// so it is returned as a raw matrix.
MatrixXc linear_inversion(const std::vector<Measurement>& data, int dim);

std::vector<Measurement> measurements(const CountsTable& counts, const Unitary2& m_A, const Unitary2& m_B);

/// Single-qubit counts per analyzer basis.
struct QubitCounts {
  std::vector<std::pair<Basis, double>> rows;
};

/// Counts over the six bases from a single-qubit state with `shots` trials
/// per basis; exact expectations when rng_seed is empty.
QubitCounts qubit_counts(const Matrix2c& rho, double shots, std::optional<std::uint64_t> rng_seed);
DensityMatrix mle_single_qubit(const QubitCounts& counts, const MleOptions& options = {});

struct FidelityPurity {
  double fidelity = 0.0;
  double purity = 0.0;
};
FidelityPurity fidelity_and_purity(const MLEResult& result, const PureState2& target);

struct ErrorEstimate {
  double fidelity_mean = 0.0;
  double fidelity_sigma = 0.0;
  double purity_mean = 0.0;
  double purity_sigma = 0.0;
  int n_resamples = 0;
  std::vector<double> fidelities;
};

/// Poisson resampling of every count (mean = measured count) followed by a
/// fresh MLE. Resamples are independent and run on `threads` workers with
/// seeds derived from `seed`. Throws for n < 100.
ErrorEstimate monte_carlo_errors(const CountsTable& counts, int n, std::uint64_t seed,
                                 const PureState2& target, const Unitary2& m_A = Unitary2::identity(),
                                 const Unitary2& m_B = Unitary2::identity(), int threads = 1,
                                 const MleOptions& options = {20000, 1e-8, 1e-12, false});
/// Same over explicit effects, e.g. rows reconstructed with different
/// calibration epochs.
ErrorEstimate monte_carlo_errors(const std::vector<Measurement>& data, int n, std::uint64_t seed,
                                 const PureState2& target, int threads = 1,
                                 const MleOptions& options = {20000, 1e-8, 1e-12, false});

/// Chi matrix in the Pauli basis (sigma_0..sigma_3), E(rho) =
/// sum_mn chi_mn sigma_m rho sigma_n^dagger.
struct ProcessMatrix {
  Matrix4c chi = Matrix4c::Zero();
};

struct ProcessInput {
  Basis input = Basis::H;
  QubitCounts output;
};

/// Reconstructs each output state by single-qubit MLE, solves for chi by least
/// squares and projects onto the completely-positive trace-preserving set
/// (Dykstra alternating projections). Throws unless all six inputs are present.
ProcessMatrix process_tomography(const std::vector<ProcessInput>& io_pairs, const MleOptions& options = {});

/// Chi of the exact channel rho -> sum_mn chi_mn sigma_m rho sigma_n^dagger
/// for a channel given by its action on density matrices.
ProcessMatrix chi_of_unitary(const Unitary2& u);
ProcessMatrix chi_of_channel(const PolarizationChannel& channel);
Matrix2c apply_process(const ProcessMatrix& chi, const Matrix2c& rho);

/// <u|chi|u> with u_m = Tr(sigma_m U)/2.
double process_fidelity(const ProcessMatrix& chi, const Unitary2& target);

struct CalibrationResult {
  Unitary2 rotation = Unitary2::identity();
  /// Purity of an input fell below 0.9.
  bool low_purity_warning = false;
  double residual = 0.0;  // summed infidelity of the two fitted directions
};

/// Unitary M with M|H> and M|R> closest to the principal eigenvectors of the
/// measured outputs. Closed-form start, refined over SU(2). Throws
/// std::runtime_error when an output has no dominant eigenvector.
CalibrationResult calibrate_rotation(const DensityMatrix& measured_H_out, const DensityMatrix& measured_R_out);

/// Overdetermined variant over arbitrary prepared inputs.
CalibrationResult calibrate_rotation(const std::vector<Basis>& inputs,
                                     const std::vector<DensityMatrix>& measured_outputs);

/// Projectors M^dagger|b><b|M per arm: nominal analyzer settings seen from
/// the input side of a channel that applies M.
std::vector<Matrix4c> rotate_bases(const std::vector<ProjectionSetting>& settings, const Unitary2& m_A,
                                   const Unitary2& m_B);

struct ResultRow {
  std::string quantity;
  double value = 0.0;
  double sigma = 0.0;
};
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace qfclink
