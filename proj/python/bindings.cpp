#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pulselab/errors.hpp"
#include "pulselab/harness.hpp"
#include "pulselab/io.hpp"
#include "pulselab/magnus.hpp"
#include "pulselab/metrics.hpp"
#include "pulselab/noise.hpp"
#include "pulselab/propagator.hpp"
#include "pulselab/pulses.hpp"

namespace py = pybind11;
using namespace pulselab;

namespace {

AutocorrelationModel make_model(const std::string& kind, double g0, double gamma, double eta0) {
  return correlation_kind_from_string(kind) == CorrelationKind::Gaussian
             ? AutocorrelationModel::gaussian(g0, gamma, eta0)
             : AutocorrelationModel::exponential(g0, gamma, eta0);
}

PiecewiseConstantPulse pulse_at(const std::string& name, double v) {
  const auto& p = PulseCatalog::builtin().at(name);
  return v > 0.0 ? p.with_peak_amplitude(v) : p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Shaped pi pulses under classical dephasing noise";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("catalog_names", [] { return PulseCatalog::builtin().names(); });
  m.def("catalog_json", [] { return PulseCatalog::builtin().to_json(); });

  m.def(
      "first_order_integrals",
      [](const std::string& name, double v) {
        const auto r = first_order_integrals(pulse_at(name, v));
        return py::make_tuple(r.sin_integral, r.cos_integral);
      },
      py::arg("pulse"), py::arg("v") = 0.0, "(S, C) of a catalog pulse; v <= 0 keeps tau_p = 1");

  m.def("tau_p", [](const std::string& name, double v) { return pulse_at(name, v).tau_p(); },
        py::arg("pulse"), py::arg("v"));

  m.def(
      "evaluate_i1",
      [](const std::string& name, double v, const std::string& model, double g0, double gamma) {
        return evaluate_i1(pulse_at(name, v), make_model(model, g0, gamma, 0.0));
      },
      py::arg("pulse"), py::arg("v") = 1.0, py::arg("model") = "exponential", py::arg("g0") = 1.0,
      py::arg("gamma") = 0.01);

  m.def(
      "evaluate_i32",
      [](const std::string& name, double v, const std::string& model, double g0, double gamma) {
        return evaluate_i32(pulse_at(name, v), make_model(model, g0, gamma, 0.0));
      },
      py::arg("pulse"), py::arg("v") = 1.0, py::arg("model") = "exponential", py::arg("g0") = 1.0,
      py::arg("gamma") = 0.01);

  m.def(
      "frobenius",
      [](std::complex<double> u00, std::complex<double> u01, std::complex<double> u10,
         std::complex<double> u11) {
        const auto s = frobenius_from_unitary(Unitary2(u00, u01, u10, u11));
        return py::make_tuple(s.delta_f_squared, std::vector<double>(s.partials.begin(), s.partials.end()));
      },
      "(Delta_F^2, [x, y, z partials]) of a correcting factor given row-major");

  m.def(
      "nogo_report",
      [](const std::string& name, std::size_t grid_n, double gamma) {
        const auto p = pulse_at(name, 1.0);
        const auto model = make_model("exponential", 1.0, gamma, 0.0);
        return nogo_report_json(name, verify_nogo(p, grid_n, model), evaluate_i32(p, model));
      },
      py::arg("pulse"), py::arg("grid_n") = 2048, py::arg("gamma") = 0.01, "JSON report");

  m.def(
      "scaling",
      [](std::vector<std::string> pulses, const std::string& model, double gamma,
         std::vector<double> inv_v, std::uint64_t realizations, std::size_t steps, std::uint64_t seed,
         unsigned workers) {
        ScalingExperimentConfig c;
        c.pulses = std::move(pulses);
        c.model = make_model(model, 1.0, gamma, 0.0);
        c.inv_v_grid = std::move(inv_v);
        c.realizations = realizations;
        c.steps_per_pulse = steps;
        c.seed = seed;
        c.fit_min = c.inv_v_grid.front();
        c.fit_max = c.inv_v_grid.back();
        c.track_polarization = true;
        c.workers = workers;
        ScalingResult r;
        {
          py::gil_scoped_release release;
          r = run_scaling(c);
        }
        py::list rows;
        for (const auto& cell : r.cells) {
          py::dict d;
          d["pulse"] = cell.pulse;
          d["inv_v"] = cell.inv_v;
          d["mean_df2"] = cell.total.mean_df2;
          d["stderr_df2"] = cell.total.stderr_df2;
          d["mean_df"] = cell.total.mean_df;
          rows.append(d);
        }
        py::dict slopes;
        for (const auto& f : r.fits)
          slopes[py::str(f.pulse)] = f.total ? py::object(py::float_(f.total->slope)) : py::none();
        return py::make_tuple(rows, slopes);
      },
      py::arg("pulses"), py::arg("model") = "gaussian", py::arg("gamma") = 0.1, py::arg("inv_v"),
      py::arg("realizations") = 2000, py::arg("steps") = 128, py::arg("seed") = 0, py::arg("workers") = 0,
      "Monte-Carlo sweep; returns (cells, fitted Delta_F slopes)");
}
