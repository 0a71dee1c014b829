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

#include "qfclink/polarization.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qfclink {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr Complex kI{0.0, 1.0};

constexpr double kNormTol = 1e-12;
constexpr double kUnitaryTol = 1e-10;
constexpr double kHermitianTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kNegativeEigenTol = 1e-9;

}  // namespace

char basis_symbol(Basis b) {
  switch (b) {
    case Basis::H: return 'H';
    case Basis::V: return 'V';
    case Basis::D: return 'D';
    case Basis::A: return 'A';
    case Basis::R: return 'R';
    case Basis::L: return 'L';
  }
  return '?';
}

Basis parse_basis(std::string_view symbol) {
  if (symbol.size() == 1) {
    switch (symbol[0]) {
      case 'H': case 'h': return Basis::H;
      case 'V': case 'v': return Basis::V;
      case 'D': case 'd': return Basis::D;
      case 'A': case 'a': return Basis::A;
      case 'R': case 'r': return Basis::R;
      case 'L': case 'l': return Basis::L;
      default: break;
    }
  }
  throw std::invalid_argument("unknown polarization basis '" + std::string(symbol) + "'");
}

Vector2c basis_ket(Basis b) {
  switch (b) {
    case Basis::H: return Vector2c(1.0, 0.0);
    case Basis::V: return Vector2c(0.0, 1.0);
    case Basis::D: return Vector2c(kInvSqrt2, kInvSqrt2);
    case Basis::A: return Vector2c(kInvSqrt2, -kInvSqrt2);
    case Basis::R: return Vector2c(kInvSqrt2, kI * kInvSqrt2);
    case Basis::L: return Vector2c(kInvSqrt2, -kI * kInvSqrt2);
  }
  throw std::invalid_argument("invalid basis");
}

Basis orthogonal(Basis b) {
  switch (b) {
    case Basis::H: return Basis::V;
    case Basis::V: return Basis::H;
    case Basis::D: return Basis::A;
    case Basis::A: return Basis::D;
    case Basis::R: return Basis::L;
    case Basis::L: return Basis::R;
  }
  throw std::invalid_argument("invalid basis");
}

PureState1::PureState1(const Vector2c& amplitudes) : amps_(amplitudes) {
  if (std::abs(amps_.squaredNorm() - 1.0) > kNormTol) {
    throw std::invalid_argument("single-photon state is not normalized");
  }
}

PureState1 PureState1::of(Basis b) { return PureState1(basis_ket(b)); }

PureState2::PureState2(const Vector4c& amplitudes) : amps_(amplitudes) {
  if (std::abs(amps_.squaredNorm() - 1.0) > kNormTol) {
    throw std::invalid_argument("two-photon state is not normalized");
  }
}

Unitary2::Unitary2(const Matrix2c& m) : m_(m) {
  if ((m_ * m_.adjoint() - Matrix2c::Identity()).cwiseAbs().maxCoeff() > kUnitaryTol) {
    throw std::invalid_argument("matrix is not unitary");
  }
}

Unitary2 Unitary2::identity() { return Unitary2(Matrix2c::Identity()); }

Unitary2 Unitary2::adjoint() const { return Unitary2(m_.adjoint()); }

Unitary2 operator*(const Unitary2& a, const Unitary2& b) {
  // Re-orthonormalize so long products do not drift out of tolerance.
  Eigen::JacobiSVD<Matrix2c> svd(a.m_ * b.m_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return Unitary2(svd.matrixU() * svd.matrixV().adjoint());
}

DensityMatrix DensityMatrix::from_matrix(const MatrixXc& m) {
  if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 4)) {
    throw std::invalid_argument("density matrix must be 2x2 or 4x4");
  }
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  const Complex tr = m.trace();
  if (std::abs(tr - 1.0) > kTraceTol) {
    throw std::invalid_argument("density matrix trace is not 1");
  }
  MatrixXc herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(herm);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -kNegativeEigenTol) {
    throw std::invalid_argument("density matrix has a negative eigenvalue");
  }
  if (min_eig < 0.0) {
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
    vals /= vals.sum();
    herm = es.eigenvectors() * vals.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  }
  herm /= herm.trace().real();
  return DensityMatrix(std::move(herm));
}

DensityMatrix DensityMatrix::from_pure(const PureState1& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::from_pure(const PureState2& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim != 2 && dim != 4) throw std::invalid_argument("dimension must be 2 or 4");
  return DensityMatrix(MatrixXc::Identity(dim, dim) / static_cast<double>(dim));
}

std::string ProjectionSetting::label() const {
  return std::string{basis_symbol(a), basis_symbol(b)};
}

PureState2 bell_state(double phi, double c1, double c2) {
  if (c1 < 0.0 || c2 < 0.0) throw std::invalid_argument("bell_state weights must be non-negative");
  const double norm = std::hypot(c1, c2);
  if (!(c1 + c2 > 0.0)) throw std::invalid_argument("bell_state weights are both zero");
  Vector4c amps = Vector4c::Zero();
  amps(1) = c1 / norm;
  amps(2) = -c2 * std::exp(kI * phi) / norm;
  return PureState2(amps);
}

double fidelity(const DensityMatrix& rho, const PureState2& psi) {
  if (rho.dim() != 4) throw std::invalid_argument("fidelity: expected a two-qubit density matrix");
  const Vector4c& v = psi.amplitudes();
  return std::clamp((v.adjoint() * rho.matrix() * v)(0, 0).real(), 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const PureState1& psi) {
  if (rho.dim() != 2) throw std::invalid_argument("fidelity: expected a single-qubit density matrix");
  const Vector2c& v = psi.amplitudes();
  return std::clamp((v.adjoint() * rho.matrix() * v)(0, 0).real(), 0.0, 1.0);
}

double purity(const DensityMatrix& rho) {
  return (rho.matrix() * rho.matrix()).trace().real();
}

Matrix2c projector_matrix(Basis b) {
  const Vector2c k = basis_ket(b);
  return k * k.adjoint();
}

Matrix4c projector_matrix(const ProjectionSetting& setting) {
  Vector4c k;
  const Vector2c ka = basis_ket(setting.a);
  const Vector2c kb = basis_ket(setting.b);
  k << ka(0) * kb(0), ka(0) * kb(1), ka(1) * kb(0), ka(1) * kb(1);
  return k * k.adjoint();
}

DensityMatrix projector(const ProjectionSetting& setting) {
  return DensityMatrix::from_matrix(projector_matrix(setting));
}

double born_probability(const DensityMatrix& rho, const MatrixXc& effect) {
  if (effect.rows() != rho.dim() || effect.cols() != rho.dim()) {
    throw std::invalid_argument("born_probability: dimension mismatch");
  }
  return (effect * rho.matrix()).trace().real();
}

DensityMatrix apply_local(const DensityMatrix& rho, const Unitary2& u_a, const Unitary2& u_b) {
  if (rho.dim() != 4) throw std::invalid_argument("apply_local: expected a two-qubit state");
  const Matrix4c u = Eigen::kroneckerProduct(u_a.matrix(), u_b.matrix());
  return DensityMatrix::from_matrix(u * rho.matrix() * u.adjoint());
}

DensityMatrix apply_unitary(const DensityMatrix& rho, const Unitary2& u) {
  if (rho.dim() != 2) throw std::invalid_argument("apply_unitary: expected a single-qubit state");
  return DensityMatrix::from_matrix(u.matrix() * rho.matrix() * u.matrix().adjoint());
}

Matrix2c pauli(int k) {
  Matrix2c m;
  switch (k) {
    case 0: m << 1.0, 0.0, 0.0, 1.0; break;
    case 1: m << 0.0, 1.0, 1.0, 0.0; break;
    case 2: m << 0.0, -kI, kI, 0.0; break;
    case 3: m << 1.0, 0.0, 0.0, -1.0; break;
    default: throw std::invalid_argument("pauli index must be in 0..3");
  }
  return m;
}

Unitary2 unitary_from_euler(double alpha, double beta, double gamma) {
  auto rz = [](double t) {
    Matrix2c m = Matrix2c::Zero();
    m(0, 0) = std::exp(-kI * (t / 2.0));
    m(1, 1) = std::exp(kI * (t / 2.0));
    return m;
  };
  Matrix2c ry;
  ry << std::cos(beta / 2.0), -std::sin(beta / 2.0), std::sin(beta / 2.0), std::cos(beta / 2.0);
  return Unitary2(rz(alpha) * ry * rz(gamma));
}

Unitary2 jones_rotation(double theta) {
  Matrix2c m;
  m << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return Unitary2(m);
}

Unitary2 gauge_fixed(const Unitary2& u) {
  const Matrix2c& m = u.matrix();
  const Complex pivot = std::abs(m(0, 0)) > 1e-12 ? m(0, 0) : m(0, 1);
  const Complex phase = std::conj(pivot) / std::abs(pivot);
  Matrix2c fixed = m * phase;
  // The pivot is now real; kill the rounding residue.
  if (std::abs(m(0, 0)) > 1e-12) {
    fixed(0, 0) = std::abs(fixed(0, 0));
  } else {
    fixed(0, 1) = std::abs(fixed(0, 1));
  }
  return Unitary2(fixed);
}

double unitary_fidelity(const Unitary2& u, const Unitary2& v) {
  return std::norm((u.matrix().adjoint() * v.matrix()).trace()) / 4.0;
}

EigenPairs eigen_decomposition(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(rho.matrix());
  return {es.eigenvalues(), es.eigenvectors()};
}

nlohmann::json matrix_to_json(const MatrixXc& m) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json re_row = nlohmann::json::array();
    nlohmann::json im_row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re_row.push_back(m(r, c).real());
      im_row.push_back(m(r, c).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  return {{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

MatrixXc matrix_from_json(const nlohmann::json& j) {
  const int dim = j.at("dim").get<int>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (dim <= 0 || re.size() != static_cast<std::size_t>(dim) ||
      im.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("matrix json: shape does not match dim");
  }
  MatrixXc m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    if (re[r].size() != static_cast<std::size_t>(dim) || im[r].size() != static_cast<std::size_t>(dim)) {
      throw std::invalid_argument("matrix json: ragged row");
    }
    for (int c = 0; c < dim; ++c) m(r, c) = Complex(re[r][c].get<double>(), im[r][c].get<double>());
  }
  return m;
}

nlohmann::json to_json(const DensityMatrix& rho) { return matrix_to_json(rho.matrix()); }

DensityMatrix density_matrix_from_json(const nlohmann::json& j) {
  return DensityMatrix::from_matrix(matrix_from_json(j));
}

}  // namespace qfclink
