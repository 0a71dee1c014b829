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
#include <numbers>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "qfclink/polarization.hpp"
#include "test_util.hpp"

using namespace qfclink;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Polarization, CircularConvention) {
  const Vector2c r = basis_ket(Basis::R);
  EXPECT_NEAR(std::abs(r(0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r(1) - Complex(0.0, 1.0 / std::sqrt(2.0))), 0.0, 1e-15);
  for (Basis b : kAllBases) {
    EXPECT_NEAR(std::abs(basis_ket(b).dot(basis_ket(orthogonal(b)))), 0.0, 1e-15);
    EXPECT_EQ(parse_basis(std::string(1, basis_symbol(b))), b);
  }
  EXPECT_THROW(parse_basis("X"), std::invalid_argument);
}

TEST(Polarization, BellStateAt270Degrees) {
  // (|HV> - e^{i 3pi/2}|VH>)/sqrt2 = (|HV> + i|VH>)/sqrt2
  const Vector4c a = bell_state(1.5 * kPi).amplitudes();
  EXPECT_NEAR(std::abs(a(1) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(2) - Complex(0.0, 1.0 / std::sqrt(2.0))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(0)) + std::abs(a(3)), 0.0, 1e-15);
}

TEST(Polarization, BellStateIsNormalized) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double c1 = u(rng);
    const double c2 = i == 0 ? 0.0 : u(rng);
    EXPECT_NEAR(bell_state(2.0 * kPi * u(rng), c1 + 1e-3, c2).amplitudes().norm(), 1.0, 1e-12);
  }
}

TEST(Polarization, LocalUnitaryPreservesFidelity) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Unitary2 u = test::random_unitary(rng);
    const PureState2 psi = test::random_pure_state(rng);
    const DensityMatrix rotated = apply_local(DensityMatrix::from_pure(psi), u, Unitary2::identity());
    const Matrix4c ui = Eigen::kroneckerProduct(u.matrix(), Matrix2c::Identity()).eval();
    EXPECT_NEAR(fidelity(rotated, PureState2(ui * psi.amplitudes())), 1.0, 1e-10);
  }
}

TEST(Polarization, HvSettingsSumToOne) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const DensityMatrix rho = test::random_density_matrix(rng, 4);
    double total = 0.0;
    for (Basis a : {Basis::H, Basis::V}) {
      for (Basis b : {Basis::H, Basis::V}) total += born_probability(rho, projector_matrix(ProjectionSetting{a, b}));
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

TEST(Polarization, EigenDecompositionRoundTrip) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const DensityMatrix rho = test::random_density_matrix(rng, i % 2 ? 2 : 4);
    const EigenPairs e = eigen_decomposition(rho);
    for (int k = 1; k < e.values.size(); ++k) EXPECT_LE(e.values(k - 1), e.values(k));
    const MatrixXc back = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    EXPECT_LT((back - rho.matrix()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Polarization, DensityMatrixValidation) {
  MatrixXc m = MatrixXc::Identity(4, 4) * 0.25;
  EXPECT_NO_THROW(DensityMatrix::from_matrix(m));
  m(0, 0) = 1.0;
  m(1, 1) = -0.25;
  m(2, 2) = 0.125;
  m(3, 3) = 0.125;
  EXPECT_THROW(DensityMatrix::from_matrix(m), std::invalid_argument);
  MatrixXc h = MatrixXc::Identity(2, 2) * 0.5;
  h(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix::from_matrix(h), std::invalid_argument);
  EXPECT_THROW(DensityMatrix::from_matrix(MatrixXc::Identity(3, 3) / 3.0), std::invalid_argument);
  EXPECT_THROW(Unitary2(Matrix2c::Identity() * 2.0), std::invalid_argument);
}

TEST(Polarization, EulerAnglesAndComposition) {
  EXPECT_NEAR(unitary_fidelity(unitary_from_euler(0, 0, 0), Unitary2::identity()), 1.0, 1e-15);
  const Unitary2 a = unitary_from_euler(0.3, 1.1, -0.4);
  const Unitary2 b = jones_rotation(0.7);
  // (a * b) applies b first
  const Vector2c h = basis_ket(Basis::H);
  EXPECT_LT(((a * b).matrix() * h - a.matrix() * (b.matrix() * h)).norm(), 1e-14);
  EXPECT_NEAR(unitary_fidelity(a * a.adjoint(), Unitary2::identity()), 1.0, 1e-14);
  // jones_rotation(pi/2) maps H to V
  EXPECT_NEAR(std::abs(basis_ket(Basis::V).dot(jones_rotation(kPi / 2).matrix() * h)), 1.0, 1e-14);
}

TEST(Polarization, UnitaryFidelityIgnoresGlobalPhase) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const Unitary2 u = test::random_unitary(rng);
    const Unitary2 v(u.matrix() * std::polar(1.0, 0.37 * i));
    EXPECT_NEAR(unitary_fidelity(u, v), 1.0, 1e-12);
    EXPECT_NEAR(unitary_fidelity(gauge_fixed(u), gauge_fixed(v)), 1.0, 1e-12);
    EXPECT_LT((gauge_fixed(u).matrix() - gauge_fixed(v).matrix()).norm(), 1e-10);
  }
}

TEST(Polarization, JsonRoundTrip) {
  std::mt19937_64 rng(2);
  const DensityMatrix rho = test::random_density_matrix(rng, 4);
  const DensityMatrix back = density_matrix_from_json(to_json(rho));
  EXPECT_LT((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}
