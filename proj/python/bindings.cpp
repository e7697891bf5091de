#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kerrqed/analysis.hpp"
#include "kerrqed/model.hpp"
#include "kerrqed/oracle.hpp"
#include "kerrqed/propagator.hpp"
#include "kerrqed/scenario.hpp"

namespace py = pybind11;
using namespace kerrqed;

namespace {

py::dict series_dict(const ScenarioResult& r) {
  py::dict out;
  for (const auto& run : r.runs) {
    py::dict per;
    for (const auto& [obs, s] : run.series)
      per[to_string(obs)] = py::make_tuple(py::array_t<double>(s.times.size(), s.times.data()),
                                           py::array_t<double>(s.values.size(), s.values.data()));
    out[to_string(run.engine)] = per;
  }
  return out;
}

PureState state_from(int n1, int n2, const CVector& amps) { return PureState(Dims{n1, n2}, amps); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-mode Kerr cavity QED: analytic propagator, numeric oracle and entanglement measures";

  static py::exception<Error> exc(m, "KerrqedError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(exc, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<RawParams>(m, "RawParams")
      .def(py::init<>())
      .def_readwrite("omega1", &RawParams::omega1)
      .def_readwrite("omega2", &RawParams::omega2)
      .def_readwrite("omega0", &RawParams::omega0)
      .def_readwrite("chi1", &RawParams::chi1)
      .def_readwrite("chi2", &RawParams::chi2)
      .def_readwrite("chi_bar", &RawParams::chi_bar)
      .def_readwrite("lam", &RawParams::lambda)
      .def_readwrite("lambda1", &RawParams::lambda1)
      .def_readwrite("lambda2", &RawParams::lambda2);

  py::class_<TransformedParams>(m, "TransformedParams")
      .def(py::init<>())
      .def_readwrite("theta", &TransformedParams::theta)
      .def_readwrite("Omega1", &TransformedParams::Omega1)
      .def_readwrite("Omega2", &TransformedParams::Omega2)
      .def_readwrite("mu1", &TransformedParams::mu1)
      .def_readwrite("mu2", &TransformedParams::mu2)
      .def_readwrite("mu_bar", &TransformedParams::mu_bar)
      .def_readwrite("Delta", &TransformedParams::Delta)
      .def_readwrite("chi", &TransformedParams::chi)
      .def_readwrite("lam", &TransformedParams::lambda)
      .def("__repr__", [](const TransformedParams& p) {
        return "TransformedParams(theta=" + std::to_string(p.theta) + ", mu1=" + std::to_string(p.mu1) +
               ", mu2=" + std::to_string(p.mu2) + ", Delta=" + std::to_string(p.Delta) +
               ", chi=" + std::to_string(p.chi) + ")";
      });

  m.def("balanced_lambda", &balanced_lambda);
  m.def("decoupled_params", [](const RawParams& r) { return decoupled_model(r).params; },
        "Rotated-frame parameters with the balanced coupling and mode 1 decoupled.");
  m.def("transform_params", [](const RawParams& r, double theta) { return transform_params(r, theta); });

  m.def("block_u", [](int m1, int m2, double t, const TransformedParams& p) {
    return Eigen::Matrix2cd(block_u(m1, m2, t, p).u);
  });
  m.def("evolve_pure",
        [](const CVector& amps, int n1, int n2, double t, const TransformedParams& p) {
          return CVector(evolve_pure(state_from(n1, n2, amps), t, p).amps());
        },
        py::arg("amps"), py::arg("n1"), py::arg("n2"), py::arg("t"), py::arg("params"),
        "Interaction-picture evolution of amplitudes indexed (atom, m1, m2), atom slowest.");
  m.def("oracle_evolve",
        [](const CVector& amps, int n1, int n2, const std::vector<double>& times, const TransformedParams& p) {
          const auto dec = spectral(build_transformed(p, n1, n2));
          const PureState psi = state_from(n1, n2, amps);
          CMatrix out(amps.size(), static_cast<Eigen::Index>(times.size()));
          for (std::size_t i = 0; i < times.size(); ++i)
            out.col(static_cast<Eigen::Index>(i)) = propagate(dec, psi, times[i]).amps();
          return out;
        },
        "Schroedinger-picture states from the rotated-frame Hamiltonian, one column per time.");
  m.def("four_level_rho", [](double t, double gamma, const TransformedParams& p) {
    return Eigen::Matrix4cd(four_level_rho(t, gamma, p).matrix());
  });

  m.def("atomic_inversion", [](const CVector& amps, int n1, int n2) {
    return atomic_inversion(state_from(n1, n2, amps));
  });
  m.def("linear_entropy_atom", [](const CVector& amps, int n1, int n2) {
    return linear_entropy_atom(state_from(n1, n2, amps));
  });
  m.def("concurrence_general", py::overload_cast<const Eigen::Matrix4cd&>(&concurrence_general));
  m.def("concurrence_x", py::overload_cast<const Eigen::Matrix4cd&>(&concurrence_x));
  m.def("sudden_death_formula", &sudden_death_formula);
  m.def("revival_time_formula", &revival_time_formula, py::arg("params"), py::arg("n_bar"), py::arg("n") = 1);
  m.def("cnot_kerr", &cnot_kerr);
  m.def("gate_return_probabilities", [](const TransformedParams& p, int n) {
    const GateReport r = gate_check(p, n);
    py::dict d;
    for (const auto& e : r.entries) d[py::str(e.label)] = e.return_probability;
    return d;
  });
  m.def("detect_sudden_death",
        [](std::vector<double> t, std::vector<double> v, double eps, double dwell) {
          return detect_sudden_death(TimeSeries{std::move(t), std::move(v), "c"}, {eps, dwell});
        },
        py::arg("times"), py::arg("values"), py::arg("eps") = 1e-4, py::arg("dwell") = 5.0);

  m.def("_run_scenario",
        [](const std::string& config_json, int threads) {
          const ScenarioResult r = run_scenario(parse_config(nlohmann::json::parse(config_json)), threads);
          return py::make_tuple(series_dict(r), r.report.dump());
        },
        py::arg("config_json"), py::arg("threads") = 1);
  m.def("_compare",
        [](const std::string& config_json, int threads) {
          return compare(parse_config(nlohmann::json::parse(config_json)), threads).report.dump();
        },
        py::arg("config_json"), py::arg("threads") = 1);
  m.def("_figure_preset", [](int f) {
    std::vector<std::string> out;
    for (const auto& c : figure_preset(f)) out.push_back(to_json(c).dump());
    return out;
  });
}
