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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qfclink/config.hpp"
#include "qfclink/coupling_optimizer.hpp"
#include "qfclink/event_simulator.hpp"
#include "qfclink/link_model.hpp"
#include "qfclink/scenario.hpp"
#include "qfclink/source_model.hpp"
#include "qfclink/tomography.hpp"
#include "qfclink/version.hpp"

namespace py = pybind11;
using namespace qfclink;

namespace {

Setup setup_arg(const std::string& tag) { return parse_setup(tag); }

std::vector<std::tuple<std::string, std::string, double, double>> table_rows(const CountsTable& t) {
  std::vector<std::tuple<std::string, std::string, double, double>> out;
  for (const auto& r : t.rows) {
    out.emplace_back(std::string(1, basis_symbol(r.setting.a)), std::string(1, basis_symbol(r.setting.b)), r.counts,
                     r.background);
  }
  return out;
}

CountsTable table_from_rows(const std::vector<std::tuple<std::string, std::string, double>>& rows) {
  CountsTable t;
  for (const auto& [a, b, n] : rows) t.rows.push_back({{parse_basis(a), parse_basis(b)}, n, 0.0});
  return t;
}

Unitary2 unitary_arg(const Matrix2c& m) { return Unitary2(m); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Telecom quantum photonic interface simulator";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<SourceParams>(m, "SourceParams")
      .def(py::init<>())
      .def_readwrite("pair_rate_per_mW", &SourceParams::pair_rate_per_mW)
      .def_readwrite("pump_power_mW", &SourceParams::pump_power_mW)
      .def_readwrite("tau_H_ns", &SourceParams::tau_H_ns)
      .def_readwrite("tau_V_ns", &SourceParams::tau_V_ns)
      .def_readwrite("phase_rad", &SourceParams::phase_rad)
      .def_readwrite("c1", &SourceParams::c1)
      .def_readwrite("c2", &SourceParams::c2)
      .def_readwrite("cavity_linewidth_MHz", &SourceParams::cavity_linewidth_MHz)
      .def("tau_mean_ns", &SourceParams::tau_mean_ns)
      .def("pair_rate", &SourceParams::pair_rate);

  m.def("bell_state", [](double phi, double c1, double c2) { return bell_state(phi, c1, c2).amplitudes(); },
        py::arg("phi"), py::arg("c1") = 1.0, py::arg("c2") = 1.0);
  m.def("source_state", [](const SourceParams& p) { return source_state(p).amplitudes(); });
  m.def("analytic_sbr", &analytic_sbr, py::arg("window_ns"), py::arg("params"));
  m.def("analytic_signal", &analytic_signal);
  m.def("analytic_background", &analytic_background);
  m.def("fidelity_ceiling", &fidelity_ceiling, py::arg("sbr"), py::arg("f_wo_bg") = 1.0);
  m.def("wavepacket_mass", &wavepacket_mass);
  m.def("cluster_spectrum", [](const SourceParams& p, int n) {
    std::vector<std::pair<double, double>> out;
    for (const auto& mode : cluster_spectrum(p, n).modes) out.emplace_back(mode.frequency_GHz, mode.weight);
    return out;
  }, py::arg("params"), py::arg("n_modes") = 5);

  py::class_<ConverterParams>(m, "ConverterParams")
      .def_static("calibrated", &ConverterParams::calibrated)
      .def_readwrite("pump_power_H_W", &ConverterParams::pump_power_H_W)
      .def_readwrite("pump_power_V_W", &ConverterParams::pump_power_V_W)
      .def_readwrite("process_fidelity", &ConverterParams::process_fidelity);
  m.def("conversion_efficiency", [](double pump_W, const ConverterParams& p, const std::string& arm) {
    return conversion_efficiency(pump_W, p, arm == "H" ? ConverterArm::H : ConverterArm::V);
  }, py::arg("pump_W"), py::arg("params"), py::arg("arm"));
  m.def("converter_noise_rate", &converter_noise_rate);
  m.def("fiber_survival", [](double km, double db_per_km) {
    FiberParams f;
    f.length_km = km;
    f.attenuation_dB_per_km = db_per_km;
    return fiber_survival(f);
  }, py::arg("length_km"), py::arg("attenuation_dB_per_km") = 0.17);
  m.def("fpi_finesse", [] { return fpi_filter().finesse(); });
  m.def("chain_survival", [](const std::string& setup) {
    const auto cfg = build_config(setup_arg(setup));
    return std::pair{chain_survival(cfg.arm_A.chain), chain_survival(cfg.arm_B.chain)};
  }, "Survival of the (arm A, arm B) channel chains of a setup.");

  m.def("counts_table", [](const std::string& setup, double pump_mW, double duration_s, std::uint64_t seed,
                           double window_tau, bool exact) {
    LinkOverrides o;
    SourceParams s;
    s.pump_power_mW = pump_mW;
    o.source = s;
    const auto cfg = build_config(setup_arg(setup), o);
    const WindowSpec w{window_tau * cfg.source.tau_mean_ns(), cfg.tomography.background_offset_ns};
    return table_rows(counts_table(cfg, duration_s, seed, w, exact));
  }, py::arg("setup"), py::arg("pump_mW") = 20.0, py::arg("duration_s") = 1.0, py::arg("seed") = 1,
     py::arg("window_tau") = 1.5, py::arg("exact") = false,
     "Rows (basis_A, basis_B, counts, background) for the 16 tomography settings.");

  m.def("mle_reconstruct", [](const std::vector<std::tuple<std::string, std::string, double>>& rows,
                              const Matrix2c& m_A, const Matrix2c& m_B) {
    const MLEResult r = mle_reconstruct(table_from_rows(rows), unitary_arg(m_A), unitary_arg(m_B));
    return py::make_tuple(MatrixXc(r.rho.matrix()), r.iterations, r.converged);
  }, py::arg("rows"), py::arg("m_A") = Matrix2c(Matrix2c::Identity()), py::arg("m_B") = Matrix2c(Matrix2c::Identity()),
     "Returns (rho, iterations, converged) for rows of (basis_A, basis_B, counts).");
  m.def("fidelity", [](const MatrixXc& rho, const Vector4c& psi) {
    return fidelity(DensityMatrix::from_matrix(rho), PureState2(psi));
  });
  m.def("purity", [](const MatrixXc& rho) { return purity(DensityMatrix::from_matrix(rho)); });
  m.def("unitary_from_euler", [](double a, double b, double c) { return unitary_from_euler(a, b, c).matrix(); });
  m.def("unitary_fidelity", [](const Matrix2c& u, const Matrix2c& v) {
    return unitary_fidelity(Unitary2(u), Unitary2(v));
  });
  m.def("calibrate_rotation", [](const Matrix2c& h_out, const Matrix2c& r_out) {
    const auto r = calibrate_rotation(DensityMatrix::from_matrix(h_out), DensityMatrix::from_matrix(r_out));
    return py::make_tuple(r.rotation.matrix(), r.low_purity_warning);
  }, "Rotation M from the measured outputs of H and R inputs; returns (M, low_purity_warning).");

  m.def("mode_overlap", [](double wavelength_nm, double w1_um, double z1_mm, double w2_um, double z2_mm) {
    return mode_overlap(GaussianBeam::from_waist(wavelength_nm, w1_um, z1_mm),
                        GaussianBeam::from_waist(wavelength_nm, w2_um, z2_mm));
  }, "Power overlap of two coaxial Gaussian beams given by waist and distance from the waist.");

  m.def("run_scenario", [](const std::string& config_path, const std::string& out_dir, std::optional<bool> exact,
                           std::optional<std::uint64_t> seed, std::optional<double> duration_s) {
    RunFlags f;
    f.out_dir = out_dir;
    f.exact = exact;
    f.seed = seed;
    f.duration_s = duration_s;
    RunReport report;
    {
      py::gil_scoped_release release;
      report = run_scenario(config_path, f);
    }
    return py::module_::import("json").attr("loads")(report_json(report).dump());
  }, py::arg("config_path"), py::arg("out_dir") = "", py::arg("exact") = py::none(), py::arg("seed") = py::none(),
     py::arg("duration_s") = py::none(), "Runs every grid point of a config; returns the report as a dict.");
  m.def("validate_config", [](const std::string& path) {
    const auto cfg = load_config(path);
    return cfg.setups.size() * cfg.pump_powers_mW.size();
  }, "Parses a config file and returns the number of grid points; raises ConfigError.");
}
