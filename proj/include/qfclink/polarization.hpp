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

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace qfclink {

using Complex = std::complex<double>;
using Vector2c = Eigen::Vector2cd;
using Vector4c = Eigen::Vector4cd;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using MatrixXc = Eigen::MatrixXcd;

/// The six polarization analysis states.
///
/// Circular convention (fixed for the whole library): R = (H + iV)/sqrt2,
/// L = (H - iV)/sqrt2. D = (H + V)/sqrt2, A = (H - V)/sqrt2.
enum class Basis : std::uint8_t { H, V, D, A, R, L };

inline constexpr std::array<Basis, 6> kAllBases{Basis::H, Basis::V, Basis::D,
                                                Basis::A, Basis::R, Basis::L};

char basis_symbol(Basis b);
/// Throws std::invalid_argument on anything outside {H,V,D,A,R,L}.
Basis parse_basis(std::string_view symbol);
Vector2c basis_ket(Basis b);
/// The orthogonal partner within the same measurement pair (H<->V, D<->A, R<->L).
Basis orthogonal(Basis b);

/// Normalized single-photon polarization state.
class PureState1 {
 public:
  /// Throws std::invalid_argument unless the norm is 1 within 1e-12.
  explicit PureState1(const Vector2c& amplitudes);
  static PureState1 of(Basis b);

  const Vector2c& amplitudes() const { return amps_; }

 private:
  Vector2c amps_;
};

/// Normalized two-photon polarization state over {HH, HV, VH, VV}; the first
/// letter is arm A.
class PureState2 {
 public:
  explicit PureState2(const Vector4c& amplitudes);

  const Vector4c& amplitudes() const { return amps_; }

 private:
  Vector4c amps_;
};

class Unitary2 {
 public:
  /// Throws std::invalid_argument unless U U^dagger = I within 1e-10.
  explicit Unitary2(const Matrix2c& m);
  static Unitary2 identity();

  const Matrix2c& matrix() const { return m_; }
  Unitary2 adjoint() const;
  /// Composition: (a * b) applies b first.
  friend Unitary2 operator*(const Unitary2& a, const Unitary2& b);

 private:
  Matrix2c m_;
};

/// Hermitian, positive semidefinite, unit-trace matrix of dimension 2 or 4.
class DensityMatrix {
 public:
  /// Validates and normalizes. Eigenvalues in [-1e-9, 0) are clamped to zero
  /// and the trace restored; anything more negative, a trace error above 1e-10,
  /// or a Hermiticity error above 1e-10 throws std::invalid_argument.
  static DensityMatrix from_matrix(const MatrixXc& m);
  static DensityMatrix from_pure(const PureState1& psi);
  static DensityMatrix from_pure(const PureState2& psi);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const MatrixXc& matrix() const { return m_; }

 private:
  explicit DensityMatrix(MatrixXc m) : m_(std::move(m)) {}
  MatrixXc m_;
};

struct ProjectionSetting {
  Basis a = Basis::H;
  Basis b = Basis::H;

  std::string label() const;
  friend bool operator==(const ProjectionSetting&, const ProjectionSetting&) = default;
};

/// (c1|HV> - c2 e^{i phi}|VH>) / sqrt(c1^2 + c2^2).
PureState2 bell_state(double phi, double c1 = 1.0, double c2 = 1.0);

/// <psi|rho|psi>; dimension mismatch throws std::invalid_argument.
double fidelity(const DensityMatrix& rho, const PureState2& psi);
double fidelity(const DensityMatrix& rho, const PureState1& psi);
double purity(const DensityMatrix& rho);

/// Rank-one projector |a><a| (x) |b><b|.
DensityMatrix projector(const ProjectionSetting& setting);
Matrix4c projector_matrix(const ProjectionSetting& setting);
Matrix2c projector_matrix(Basis b);

/// Tr(effect * rho), real part.
double born_probability(const DensityMatrix& rho, const MatrixXc& effect);

DensityMatrix apply_local(const DensityMatrix& rho, const Unitary2& u_a, const Unitary2& u_b);
DensityMatrix apply_unitary(const DensityMatrix& rho, const Unitary2& u);

/// sigma_0 = I, sigma_1 = X, sigma_2 = Y, sigma_3 = Z.
Matrix2c pauli(int k);

/// Rz(alpha) Ry(beta) Rz(gamma), each R(theta) = exp(-i theta sigma / 2).
Unitary2 unitary_from_euler(double alpha, double beta, double gamma);
/// Real rotation of the Jones vector by angle theta: [[cos, -sin], [sin, cos]].
Unitary2 jones_rotation(double theta);
/// Removes the global phase so that the first nonzero entry in row-major
/// order of the first row is real and non-negative.
Unitary2 gauge_fixed(const Unitary2& u);
/// |Tr(U^dagger V)|^2 / 4; global-phase invariant, 1 iff U ~ V.
double unitary_fidelity(const Unitary2& u, const Unitary2& v);

struct EigenPairs {
  Eigen::VectorXd values;  // ascending
  MatrixXc vectors;        // columns
};
EigenPairs eigen_decomposition(const DensityMatrix& rho);

/// {"dim": n, "re": [[...]], "im": [[...]]}
nlohmann::json matrix_to_json(const MatrixXc& m);
MatrixXc matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(const nlohmann::json& j);

}  // namespace qfclink
