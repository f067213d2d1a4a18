// SPDX-License-Identifier: MIT
// Python bindings: configs and runs, corrector summaries, the 1D oracle and moment helpers.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tbhom/experiment.hpp"
#include "tbhom/oracle1d.hpp"

namespace py = pybind11;
using namespace tbhom;
using nlohmann::json;

namespace {

py::array_t<double> to_numpy(const Field& f) {
  const TorusGrid& g = f.grid();
  std::vector<py::ssize_t> shape(std::size_t(g.dim), py::ssize_t(g.n));
  py::array_t<double> out(shape);
  std::copy(f.comp(0).begin(), f.comp(0).end(), out.mutable_data());
  return out;
}

Field from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> a, double period) {
  if (a.ndim() < 1 || a.ndim() > 2) throw ConfigurationError("expected a 1D or 2D array");
  const int n = int(a.shape(0));
  if (a.ndim() == 2 && a.shape(1) != a.shape(0)) throw ConfigurationError("2D arrays must be square");
  Field f(TorusGrid(int(a.ndim()), n, period));
  std::copy(a.data(), a.data() + a.size(), f.comp(0).begin());
  return f;
}

py::dict summarize(const CorrectorSet& s) {
  py::list hs;
  for (const auto& h : s.hierarchies) {
    py::dict d;
    d["direction"] = std::vector<double>{h.e[0], h.e[1]};
    d["lambda"] = h.lambda;
    hs.append(d);
  }
  py::list polys;
  for (const auto& p : s.model.P) polys.append(p.coeffs);
  py::dict out;
  out["hierarchies"] = hs;
  out["abar"] = polys;
  out["Gamma_bar"] = s.model.Gamma_bar;
  out["kmax"] = s.model.kmax;
  out["fit_residual"] = s.model.fit_residual;
  return out;
}

py::dict run_dict(const RunResult& r) {
  py::list checks;
  for (const auto& c : r.checks) {
    py::dict d;
    d["name"] = c.name;
    d["passed"] = c.passed;
    d["value"] = c.value;
    d["threshold"] = c.threshold;
    d["detail"] = c.detail;
    checks.append(d);
  }
  py::dict out;
  out["passed"] = r.passed();
  out["checks"] = checks;
  out["files"] = r.files;
  out["warnings"] = r.warnings;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Taylor-Bloch homogenization core";

  // Translators run in reverse registration order: the base class goes first.
  py::register_exception<Error>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static(
          "from_json", [](const std::string& text) { return ExperimentConfig::from_json(json::parse(text)); },
          py::arg("text"))
      .def_static("load", &ExperimentConfig::load, py::arg("path"), py::arg("overrides") = std::vector<std::string>{})
      .def_readonly("kind", &ExperimentConfig::kind)
      .def_readonly("order", &ExperimentConfig::order)
      .def_readonly("eps", &ExperimentConfig::eps)
      .def_readonly("thresholds", &ExperimentConfig::thresholds)
      .def("hash", &ExperimentConfig::hash)
      .def("to_json", [](const ExperimentConfig& c) { return c.raw.dump(); });

  m.def(
      "validate",
      [](const ExperimentConfig& c) {
        const Diagnostics d = validate(c);
        return py::make_tuple(d.errors, d.warnings);
      },
      py::arg("config"), "Returns (errors, warnings).");
  m.def(
      "run_experiment",
      [](const ExperimentConfig& c, const std::string& out, int workers) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c, out, workers);
        }
        return run_dict(r);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("workers") = 1);

  m.def(
      "build_correctors",
      [](const std::string& coefficient_json, int dim, int n, int order) {
        const auto a = CoefficientSpec::from_json(json::parse(coefficient_json)).sample(TorusGrid(dim, n));
        CorrectorSet s;
        {
          py::gil_scoped_release release;
          s = build_corrector_set(a, order);
        }
        return summarize(s);
      },
      py::arg("coefficient"), py::arg("dim"), py::arg("n"), py::arg("order"),
      "Corrector hierarchies on an n^dim cell; returns lambdas per direction and the fitted abar polynomials.");

  m.def(
      "oracle_lambdas",
      [](const std::vector<double>& breaks, const std::vector<double>& values, int order) {
        Profile1D p;
        p.breaks = breaks;
        p.values = values;
        return correctors_1d(p, order).lambda;
      },
      py::arg("breaks"), py::arg("values"), py::arg("order"),
      "lambda_0..lambda_{order-1} of a piecewise-constant 1D profile.");

  m.def("fitted_order", &fitted_order, py::arg("eps"), py::arg("errors"));

  m.def(
      "gaussian_data",
      [](double lambda, int dim, double L, double eps, int points_per_period) {
        return to_numpy(gaussian_data(lambda, BoxGrid::resolved(dim, L, eps, points_per_period)));
      },
      py::arg("lam"), py::arg("dim"), py::arg("L"), py::arg("eps") = 1.0, py::arg("points_per_period") = 16);
  m.def(
      "moment_M",
      [](py::array_t<double> u, double lambda, double L) {
        const Field f = from_numpy(u, L);
        return moment_M(f, lambda, Vec{L / 2, L / 2});
      },
      py::arg("u"), py::arg("lam"), py::arg("L"), "Weighted moment about the box center.");
}
