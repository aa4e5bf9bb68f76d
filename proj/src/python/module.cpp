#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "tvmpo/config.hpp"
#include "tvmpo/errors.hpp"
#include "tvmpo/exact.hpp"
#include "tvmpo/liouvillian.hpp"
#include "tvmpo/mpo.hpp"
#include "tvmpo/observables.hpp"
#include "tvmpo/runner.hpp"

namespace py = pybind11;
using namespace tvmpo;

namespace {

py::dict summary_to_dict(const RunSummary& s) {
  py::dict d;
  d["rows"] = s.rows;
  d["steps"] = s.steps;
  d["wall_seconds"] = s.wall_seconds;
  d["ok"] = s.ok;
  d["error"] = s.error;
  return d;
}

py::dict report_to_dict(const CompareReport& r) {
  py::dict d;
  d["tolerance"] = r.tolerance;
  d["pass"] = r.pass;
  py::list entries;
  for (const CompareEntry& e : r.entries) {
    py::dict entry;
    entry["stream"] = e.stream;
    entry["max_dev"] = e.max_dev;
    entry["mean_dev"] = e.mean_dev;
    entry["points"] = e.points;
    entries.append(entry);
  }
  d["entries"] = entries;
  return d;
}

char axis_char(const std::string& axis) {
  if (axis.size() != 1) throw InvalidInputError("axis must be x, y or z");
  return axis[0];
}

}  // namespace

PYBIND11_MODULE(_tvmpo, m) {
  m.doc() = "Variational Monte Carlo dynamics of open spin lattices with an MPO ansatz";

  py::class_<MpoAnsatz>(m, "MpoAnsatz")
      .def(py::init<int, int, int, int>(), py::arg("n_sites"), py::arg("period"),
           py::arg("phys_dim"), py::arg("bond_dim"))
      .def_property_readonly("n_sites", &MpoAnsatz::n_sites)
      .def_property_readonly("period", &MpoAnsatz::period)
      .def_property_readonly("phys_dim", &MpoAnsatz::phys_dim)
      .def_property_readonly("bond_dim", &MpoAnsatz::bond_dim)
      .def_property_readonly("n_params", &MpoAnsatz::n_params)
      .def("parameters", &MpoAnsatz::parameters)
      .def("set_parameters", &MpoAnsatz::set_parameters);

  m.def("product_state", &MpoAnsatz::product_state, py::arg("n_sites"), py::arg("period"),
        py::arg("bond_dim"), py::arg("single_site_rho"));
  m.def("amplitude", &amplitude, py::arg("ansatz"), py::arg("x"));
  m.def("trace_of_rho", &trace_of_rho);
  m.def("renormalize_trace", &renormalize_trace);
  m.def("reconstruct_dense", &reconstruct_dense);
  m.def("save_checkpoint", &save_checkpoint, py::arg("ansatz"), py::arg("path"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  m.def("magnetization", [](const MpoAnsatz& a, const std::string& axis) {
    const ObservableValue v = magnetization(a, axis_char(axis));
    return py::make_tuple(v.value, v.im_residual);
  });
  m.def(
      "correlator",
      [](const MpoAnsatz& a, const std::string& axis, int distance, bool connected) {
        const ObservableValue v = correlator(a, axis_char(axis), distance, connected);
        return py::make_tuple(v.value, v.im_residual);
      },
      py::arg("ansatz"), py::arg("axis"), py::arg("distance"), py::arg("connected") = true);
  m.def("structure_factor", [](const MpoAnsatz& a, double q) {
    const ObservableValue v = structure_factor(a, q);
    return py::make_tuple(v.value, v.im_residual);
  });
  m.def("renyi2", &renyi2);
  m.def("purity", &purity);
  m.def("min_eigenvalue", &min_eigenvalue);

  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("t_end", &RunConfig::t_end)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("workers", &RunConfig::workers)
      .def_property(
          "backend", [](const RunConfig& c) { return backend_name(c.backend); },
          [](RunConfig& c, const std::string& b) { c.backend = backend_from_name(b); });

  m.def("parse_config", &parse_config, py::arg("path"));
  m.def("parse_config_string", [](const std::string& text) {
    return parse_config_json(nlohmann::json::parse(text));
  });
  m.def("resolved_config", [](const RunConfig& cfg) { return resolved_config_json(cfg).dump(2); });

  m.def("run", [](const RunConfig& cfg) {
    RunSummary s;
    {
      py::gil_scoped_release release;
      s = run(cfg);
    }
    return summary_to_dict(s);
  });
  m.def("resume", [](const RunConfig& cfg, const std::string& checkpoint) {
    return summary_to_dict(resume(cfg, checkpoint));
  });
  m.def("compare_runs", [](const std::string& a, const std::string& b, double tol) {
    return report_to_dict(compare_runs(a, b, tol));
  });
}
