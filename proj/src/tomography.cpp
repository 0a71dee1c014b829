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

#include "qfclink/tomography.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "qfclink/simplex.hpp"

namespace qfclink {

namespace {

const Complex kI(0.0, 1.0);

template <int D>
using Mat = Eigen::Matrix<Complex, D, D>;

template <int D>
Mat<D> inverse_sqrt(const Mat<D>& g) {
  Eigen::SelfAdjointEigenSolver<Mat<D>> es(g);
  if (es.eigenvalues().minCoeff() <= 1e-12 * es.eigenvalues().maxCoeff()) {
    throw std::invalid_argument("measurement effects are not informationally sufficient");
  }
  const Eigen::Matrix<double, D, 1> inv = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
}

template <int D>
Mat<D> hermitize(const Mat<D>& m) {
  Mat<D> h = 0.5 * (m + m.adjoint());
  return h / h.trace().real();
}

template <int D>
MLEResult run_mle(const std::vector<Measurement>& data, const MleOptions& opt) {
  double total = 0.0;
  for (const auto& m : data) {
    if (m.effect.rows() != D || m.effect.cols() != D) throw std::invalid_argument("mle: effect dimension mismatch");
    if (!(m.counts >= 0.0)) throw std::invalid_argument("mle: counts must be non-negative");
    total += m.counts;
  }
  if (!(total > 0.0)) throw std::invalid_argument("mle: all counts are zero");

  Mat<D> g = Mat<D>::Zero();
  for (const auto& m : data) g += m.effect;
  const Mat<D> w = inverse_sqrt<D>(g);
  std::vector<Mat<D>> effects;
  std::vector<double> freq;
  for (const auto& m : data) {
    effects.push_back(w * Mat<D>(m.effect) * w);
    freq.push_back(m.counts / total);
  }

  auto loglik = [&](const Mat<D>& sigma) {
    double l = 0.0;
    for (std::size_t j = 0; j < effects.size(); ++j) {
      if (freq[j] == 0.0) continue;
      l += freq[j] * std::log(std::max((effects[j] * sigma).trace().real(), opt.probability_floor));
    }
    return l * total;
  };
  auto r_operator = [&](const Mat<D>& sigma) {
    Mat<D> r = Mat<D>::Zero();
    for (std::size_t j = 0; j < effects.size(); ++j) {
      if (freq[j] == 0.0) continue;
      const double p = std::max((effects[j] * sigma).trace().real(), opt.probability_floor);
      r += (freq[j] / p) * effects[j];
    }
    return r;
  };

  MLEResult res;
  Mat<D> sigma = Mat<D>::Identity() / static_cast<double>(D);
  double l = loglik(sigma);
  if (opt.record_trace) res.trace.push_back(l);
  const Mat<D> eye = Mat<D>::Identity();
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const Mat<D> r = r_operator(sigma);
    Mat<D> next = hermitize<D>(Mat<D>(r * sigma * r));
    double l_next = loglik(next);
    if (l_next < l) {
      // Diluted step: (I + eps R) sigma (I + eps R) ascends for small eps.
      ++res.diluted_steps;
      double eps = 0.5;
      for (; eps > 1e-14; eps *= 0.5) {
        const Mat<D> step = eye + eps * r;
        next = hermitize<D>(Mat<D>(step * sigma * step));
        l_next = loglik(next);
        if (l_next >= l) break;
      }
      if (l_next < l) {
        next = sigma;
        l_next = l;
      }
    }
    const double change = (next - sigma).cwiseAbs().maxCoeff();
    sigma = next;
    l = l_next;
    res.iterations = it;
    if (opt.record_trace) res.trace.push_back(l);
    if (change < opt.tolerance) {
      res.converged = true;
      break;
    }
  }
  const Mat<D> rho = hermitize<D>(Mat<D>(w * sigma * w));
  res.rho = DensityMatrix::from_matrix(MatrixXc(rho));
  res.log_likelihood = log_likelihood(res.rho, data, opt.probability_floor);
  return res;
}

// Hermitian basis of 4x4 matrices, orthonormal under Tr(A^dagger B).
std::array<Matrix4c, 16> hermitian_basis4() {
  std::array<Matrix4c, 16> basis;
  int k = 0;
  const double s = 1.0 / std::sqrt(2.0);
  for (int m = 0; m < 4; ++m) {
    for (int n = m; n < 4; ++n) {
      if (m == n) {
        basis[k] = Matrix4c::Zero();
        basis[k++](m, m) = 1.0;
        continue;
      }
      basis[k] = Matrix4c::Zero();
      basis[k](m, n) = s;
      basis[k++](n, m) = s;
      basis[k] = Matrix4c::Zero();
      basis[k](m, n) = -kI * s;
      basis[k++](n, m) = kI * s;
    }
  }
  return basis;
}

Matrix4c from_coefficients(const Eigen::Matrix<double, 16, 1>& c, const std::array<Matrix4c, 16>& basis) {
  Matrix4c chi = Matrix4c::Zero();
  for (int k = 0; k < 16; ++k) chi += c(k) * basis[k];
  return chi;
}

Eigen::Matrix<double, 16, 1> to_coefficients(const Matrix4c& chi, const std::array<Matrix4c, 16>& basis) {
  Eigen::Matrix<double, 16, 1> c;
  for (int k = 0; k < 16; ++k) c(k) = (basis[k].adjoint() * chi).trace().real();
  return c;
}

Matrix4c psd_projection(const Matrix4c& chi) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(0.5 * (chi + chi.adjoint()));
  const Eigen::Vector4d clipped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
}

// exp(-i (x sx + y sy + z sz)).
Matrix2c su2_exp(double x, double y, double z) {
  const double theta = std::sqrt(x * x + y * y + z * z);
  if (theta < 1e-300) return Matrix2c::Identity();
  const Matrix2c n = (x * pauli(1) + y * pauli(2) + z * pauli(3)) / theta;
  return std::cos(theta) * Matrix2c::Identity() - kI * std::sin(theta) * n;
}

Vector2c principal_axis(const DensityMatrix& rho, bool& low_purity) {
  if (rho.dim() != 2) throw std::invalid_argument("calibrate_rotation: expected single-qubit states");
  const EigenPairs e = eigen_decomposition(rho);
  if (e.values(1) - e.values(0) < 0.1) {
    throw std::runtime_error("calibration state too mixed to define a principal axis");
  }
  if (purity(rho) < 0.9) low_purity = true;
  return e.vectors.col(1);
}

CalibrationResult refine(const std::vector<Vector2c>& kets, const std::vector<Vector2c>& targets,
                         const std::vector<Matrix2c>& starts, bool low_purity) {
  auto cost_of = [&](const Matrix2c& m) {
    double c = 0.0;
    for (std::size_t i = 0; i < kets.size(); ++i) c += 1.0 - std::norm(targets[i].dot(m * kets[i]));
    return c;
  };
  Matrix2c best = starts.front();
  double best_cost = std::numeric_limits<double>::infinity();
  SimplexOptions opt;
  opt.initial_step = 0.05;
  opt.f_tolerance = 1e-16;
  opt.x_tolerance = 1e-12;
  for (const Matrix2c& m0 : starts) {
    auto f = [&](std::span<const double> x) { return cost_of(m0 * su2_exp(x[0], x[1], x[2])); };
    const SimplexResult r = minimize_simplex(f, {0.0, 0.0, 0.0}, opt);
    if (r.value < best_cost) {
      best_cost = r.value;
      best = m0 * su2_exp(r.x[0], r.x[1], r.x[2]);
    }
  }
  // Re-orthonormalize away rounding before wrapping as a unitary.
  Eigen::JacobiSVD<Matrix2c> svd(best, Eigen::ComputeFullU | Eigen::ComputeFullV);
  CalibrationResult out;
  out.rotation = gauge_fixed(Unitary2(svd.matrixU() * svd.matrixV().adjoint()));
  out.low_purity_warning = low_purity;
  out.residual = best_cost;
  return out;
}

}  // namespace

double log_likelihood(const DensityMatrix& rho, const std::vector<Measurement>& data, double probability_floor) {
  std::vector<double> p;
  double sum = 0.0;
  for (const auto& m : data) {
    p.push_back(std::max(born_probability(rho, m.effect), probability_floor));
    sum += p.back();
  }
  double l = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    if (data[j].counts > 0.0) l += data[j].counts * std::log(p[j] / sum);
  }
  return l;
}

MLEResult mle_reconstruct(const std::vector<Measurement>& data, const MleOptions& options) {
  if (data.empty()) throw std::invalid_argument("mle: no measurements");
  const auto dim = data.front().effect.rows();
  if (dim == 2) return run_mle<2>(data, options);
  if (dim == 4) return run_mle<4>(data, options);
  throw std::invalid_argument("mle: dimension must be 2 or 4");
}

std::vector<Measurement> measurements(const CountsTable& counts, const Unitary2& m_A, const Unitary2& m_B) {
  std::vector<Measurement> data;
  for (const auto& row : counts.rows) {
    data.push_back({analyzer_projector(row.setting, m_A.adjoint(), m_B.adjoint()), row.counts});
  }
  return data;
}

MLEResult mle_reconstruct(const CountsTable& counts, const MleOptions& options) {
  return mle_reconstruct(counts, Unitary2::identity(), Unitary2::identity(), options);
}

MLEResult mle_reconstruct(const CountsTable& counts, const Unitary2& m_A, const Unitary2& m_B,
                          const MleOptions& options) {
  return mle_reconstruct(measurements(counts, m_A, m_B), options);
}

MatrixXc linear_inversion(const std::vector<Measurement>& data, int dim) {
  if (dim != 2 && dim != 4) throw std::invalid_argument("linear_inversion: dimension must be 2 or 4");
  // Pauli-product operator basis.
  std::vector<MatrixXc> ops;
  if (dim == 2) {
    for (int k = 0; k < 4; ++k) ops.emplace_back(pauli(k));
  } else {
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) ops.emplace_back(Eigen::kroneckerProduct(pauli(a), pauli(b)));
    }
  }
  const auto n_ops = static_cast<Eigen::Index>(ops.size());
  Eigen::MatrixXd design(static_cast<Eigen::Index>(data.size()), n_ops);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(data.size()));
  for (std::size_t j = 0; j < data.size(); ++j) {
    if (data[j].effect.rows() != dim) throw std::invalid_argument("linear_inversion: effect dimension mismatch");
    for (Eigen::Index k = 0; k < n_ops; ++k) {
      design(static_cast<Eigen::Index>(j), k) = (data[j].effect * ops[static_cast<std::size_t>(k)]).trace().real() / dim;
    }
    rhs(static_cast<Eigen::Index>(j)) = data[j].counts;
  }
  const Eigen::VectorXd c = design.colPivHouseholderQr().solve(rhs);
  MatrixXc rho = MatrixXc::Zero(dim, dim);
  for (Eigen::Index k = 0; k < n_ops; ++k) rho += c(k) * ops[static_cast<std::size_t>(k)] / static_cast<double>(dim);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const double tr = rho.trace().real();
  if (!(std::abs(tr) > 0.0)) throw std::invalid_argument("linear_inversion: zero trace");
  return rho / tr;
}

QubitCounts qubit_counts(const Matrix2c& rho, double shots, std::optional<std::uint64_t> rng_seed) {
  if (!(shots > 0.0)) throw std::invalid_argument("qubit_counts: shots must be positive");
  QubitCounts out;
  std::mt19937_64 engine(rng_seed.value_or(0));
  for (Basis b : kAllBases) {
    const double p = std::clamp((projector_matrix(b) * rho).trace().real(), 0.0, 1.0);
    if (!rng_seed) {
      out.rows.emplace_back(b, shots * p);
    } else {
      std::binomial_distribution<std::uint64_t> draw(static_cast<std::uint64_t>(std::llround(shots)), p);
      out.rows.emplace_back(b, static_cast<double>(draw(engine)));
    }
  }
  return out;
}

DensityMatrix mle_single_qubit(const QubitCounts& counts, const MleOptions& options) {
  std::vector<Measurement> data;
  for (const auto& [b, n] : counts.rows) data.push_back({projector_matrix(b), n});
  return mle_reconstruct(data, options).rho;
}

FidelityPurity fidelity_and_purity(const MLEResult& result, const PureState2& target) {
  return {fidelity(result.rho, target), purity(result.rho)};
}

ErrorEstimate monte_carlo_errors(const CountsTable& counts, int n, std::uint64_t seed, const PureState2& target,
                                 const Unitary2& m_A, const Unitary2& m_B, int threads,
                                 const MleOptions& options) {
  return monte_carlo_errors(measurements(counts, m_A, m_B), n, seed, target, threads, options);
}

ErrorEstimate monte_carlo_errors(const std::vector<Measurement>& base, int n, std::uint64_t seed,
                                 const PureState2& target, int threads, const MleOptions& options) {
  if (n < 100) throw std::invalid_argument("monte_carlo_errors: at least 100 resamples are required");
  std::vector<double> fid(static_cast<std::size_t>(n));
  std::vector<double> pur(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        auto data = base;
        // Redraw on the (improbable) all-zero resample.
        for (std::uint64_t attempt = 0;; ++attempt) {
          std::mt19937_64 engine(derive_seed(seed, static_cast<std::uint64_t>(i) * 1024 + attempt));
          double total = 0.0;
          for (std::size_t j = 0; j < data.size(); ++j) {
            const double mean = base[j].counts;
            data[j].counts = mean > 0.0 ? static_cast<double>(std::poisson_distribution<std::uint64_t>(mean)(engine)) : 0.0;
            total += data[j].counts;
          }
          if (total > 0.0 || attempt > 100) break;
        }
        const MLEResult r = mle_reconstruct(data, options);
        fid[static_cast<std::size_t>(i)] = fidelity(r.rho, target);
        pur[static_cast<std::size_t>(i)] = purity(r.rho);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min(threads, n));
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  auto mean_sd = [](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
  };
  ErrorEstimate e;
  std::tie(e.fidelity_mean, e.fidelity_sigma) = mean_sd(fid);
  std::tie(e.purity_mean, e.purity_sigma) = mean_sd(pur);
  e.n_resamples = n;
  e.fidelities = std::move(fid);
  return e;
}

Matrix2c apply_process(const ProcessMatrix& chi, const Matrix2c& rho) {
  Matrix2c out = Matrix2c::Zero();
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) out += chi.chi(m, n) * pauli(m) * rho * pauli(n).adjoint();
  }
  return out;
}

ProcessMatrix chi_of_unitary(const Unitary2& u) {
  Vector4c coeff;
  for (int m = 0; m < 4; ++m) coeff(m) = (pauli(m) * u.matrix()).trace() / 2.0;
  return {coeff * coeff.adjoint()};
}

ProcessMatrix chi_of_channel(const PolarizationChannel& channel) {
  // The fully depolarizing map is sum_m sigma_m rho sigma_m / 4.
  return {channel.keep * chi_of_unitary(channel.unitary).chi +
          (1.0 - channel.keep) * Matrix4c::Identity() / 4.0};
}

double process_fidelity(const ProcessMatrix& chi, const Unitary2& target) {
  Vector4c u;
  for (int m = 0; m < 4; ++m) u(m) = (pauli(m) * target.matrix()).trace() / 2.0;
  return std::clamp((u.adjoint() * chi.chi * u)(0, 0).real(), 0.0, 1.0);
}

ProcessMatrix process_tomography(const std::vector<ProcessInput>& io_pairs, const MleOptions& options) {
  for (Basis b : kAllBases) {
    const bool present = std::any_of(io_pairs.begin(), io_pairs.end(),
                                     [&](const ProcessInput& p) { return p.input == b; });
    if (!present) {
      throw std::invalid_argument(std::string("process_tomography: missing input state ") + basis_symbol(b));
    }
  }
  const auto basis = hermitian_basis4();

  // Least squares: each input contributes the 8 real numbers of its output.
  Eigen::MatrixXd design(static_cast<Eigen::Index>(8 * io_pairs.size()), 16);
  Eigen::VectorXd rhs(design.rows());
  Eigen::Index row = 0;
  for (const auto& io : io_pairs) {
    const Matrix2c rho_in = projector_matrix(io.input);
    const Matrix2c rho_out = mle_single_qubit(io.output, options).matrix();
    std::array<Matrix2c, 16> images;
    for (int k = 0; k < 16; ++k) images[k] = apply_process({basis[k]}, rho_in);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 16; ++k) {
          design(row, k) = images[k](i, j).real();
          design(row + 1, k) = images[k](i, j).imag();
        }
        rhs(row) = rho_out(i, j).real();
        rhs(row + 1) = rho_out(i, j).imag();
        row += 2;
      }
    }
  }
  Eigen::Matrix<double, 16, 1> c = design.colPivHouseholderQr().solve(rhs);

  // Trace preservation: sum_mn chi_mn sigma_n^dagger sigma_m = I, written on
  // the Pauli components of the 2x2 result.
  Eigen::Matrix<double, 4, 16> tp;
  for (int k = 0; k < 16; ++k) {
    Matrix2c a = Matrix2c::Zero();
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 4; ++n) a += basis[k](m, n) * pauli(n).adjoint() * pauli(m);
    }
    for (int p = 0; p < 4; ++p) tp(p, k) = (pauli(p) * a).trace().real();
  }
  const Eigen::Vector4d tp_target(2.0, 0.0, 0.0, 0.0);
  const Eigen::Matrix4d tp_gram_inv = (tp * tp.transpose()).inverse();
  auto project_tp = [&](const Eigen::Matrix<double, 16, 1>& x) -> Eigen::Matrix<double, 16, 1> {
    return x - tp.transpose() * (tp_gram_inv * (tp * x - tp_target));
  };
  auto project_psd = [&](const Eigen::Matrix<double, 16, 1>& x) {
    return to_coefficients(psd_projection(from_coefficients(x, basis)), basis);
  };

  // Dykstra alternating projections onto the intersection.
  Eigen::Matrix<double, 16, 1> x = c;
  Eigen::Matrix<double, 16, 1> p = Eigen::Matrix<double, 16, 1>::Zero();
  Eigen::Matrix<double, 16, 1> q = Eigen::Matrix<double, 16, 1>::Zero();
  for (int it = 0; it < 100000; ++it) {
    const Eigen::Matrix<double, 16, 1> y = project_tp(x + p);
    p = x + p - y;
    const Eigen::Matrix<double, 16, 1> x_next = project_psd(y + q);
    q = y + q - x_next;
    const double moved = (x_next - x).cwiseAbs().maxCoeff();
    x = x_next;
    if (moved < 1e-15 && (tp * x - tp_target).cwiseAbs().maxCoeff() < 1e-12) break;
  }
  Matrix4c chi = from_coefficients(x, basis);
  chi = 0.5 * (chi + chi.adjoint()).eval();
  return {chi};
}

CalibrationResult calibrate_rotation(const DensityMatrix& measured_H_out, const DensityMatrix& measured_R_out) {
  bool low_purity = false;
  const Vector2c h = principal_axis(measured_H_out, low_purity);
  const Vector2c r = principal_axis(measured_R_out, low_purity);

  // M|H> = h, M|V> = e^{i a} h_perp with a aligning M|R> to r.
  const Vector2c h_perp(-std::conj(h(1)), std::conj(h(0)));
  const double a = std::arg(r.dot(h)) - std::arg(r.dot(h_perp)) - std::numbers::pi / 2.0;
  Matrix2c m0;
  m0.col(0) = h;
  m0.col(1) = std::exp(kI * a) * h_perp;
  return refine({basis_ket(Basis::H), basis_ket(Basis::R)}, {h, r}, {m0}, low_purity);
}

CalibrationResult calibrate_rotation(const std::vector<Basis>& inputs,
                                     const std::vector<DensityMatrix>& measured_outputs) {
  if (inputs.size() != measured_outputs.size() || inputs.size() < 2) {
    throw std::invalid_argument("calibrate_rotation: need at least two matched input/output states");
  }
  bool low_purity = false;
  std::vector<Vector2c> kets;
  std::vector<Vector2c> targets;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    kets.push_back(basis_ket(inputs[i]));
    targets.push_back(principal_axis(measured_outputs[i], low_purity));
  }
  std::vector<Matrix2c> starts;
  for (double x : {0.0, 1.2}) {
    for (double y : {0.0, 1.2}) {
      for (double z : {0.0, 1.2}) starts.push_back(su2_exp(x, y, z));
    }
  }
  return refine(kets, targets, starts, low_purity);
}

std::vector<Matrix4c> rotate_bases(const std::vector<ProjectionSetting>& settings, const Unitary2& m_A,
                                   const Unitary2& m_B) {
  std::vector<Matrix4c> out;
  out.reserve(settings.size());
  for (const auto& s : settings) out.push_back(analyzer_projector(s, m_A.adjoint(), m_B.adjoint()));
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "quantity,value,sigma\n";
  out.precision(12);
  for (const auto& r : rows) out << r.quantity << ',' << r.value << ',' << r.sigma << '\n';
}

}  // namespace qfclink
