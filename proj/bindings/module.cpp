#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "treeweyl/pipeline.hpp"

namespace py = pybind11;
using namespace treeweyl;

namespace {

std::vector<std::vector<cplx>> matrix_to_lists(const Eigen::MatrixXcd& M) {
  std::vector<std::vector<cplx>> out(M.rows(), std::vector<cplx>(M.cols()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) out[i][j] = M(i, j);
  return out;
}

}  // namespace

PYBIND11_MODULE(_treeweyl, m) {
  m.doc() = "Weyl matrices of Schrodinger operators on metric trees and "
            "potential recovery by leaf peeling";

  py::register_exception<Error>(m, "TreeweylError");

  m.def("sph_bessel_j", &sph_bessel_j, py::arg("order"), py::arg("z"),
        "spherical Bessel function of the first kind, complex argument");

  py::class_<TreeGraph>(m, "TreeGraph")
      .def_property_readonly("edge_count", &TreeGraph::edge_count)
      .def_property_readonly("leaf_count", &TreeGraph::leaf_count)
      .def_readonly("leaf_order", &TreeGraph::leaf_order)
      .def("edge_length",
           [](const TreeGraph& g, int i) { return g.edges.at(i).length; })
      .def("__repr__", [](const TreeGraph& g) {
        return "<TreeGraph " + std::to_string(g.edge_count()) + " edges, " +
               std::to_string(g.leaf_count()) + " leaves>";
      });

  m.def("load_graph", &load_graph_json, py::arg("path"), py::arg("grid_G") = 2001);
  m.def("parse_graph", &parse_graph_json, py::arg("text"), py::arg("grid_G") = 2001);

  py::class_<RhoGridSpec>(m, "RhoGridSpec")
      .def(py::init<>())
      .def_readwrite("K", &RhoGridSpec::K)
      .def_readwrite("alpha_min", &RhoGridSpec::alpha_min)
      .def_readwrite("alpha_max", &RhoGridSpec::alpha_max)
      .def_readwrite("im_offset", &RhoGridSpec::im_offset)
      .def_readwrite("seed", &RhoGridSpec::seed);

  py::class_<WeylSamples>(m, "WeylSamples")
      .def_property_readonly("K", &WeylSamples::K)
      .def_property_readonly("m", &WeylSamples::m)
      .def_readonly("rho", &WeylSamples::rho)
      .def("matrix", [](const WeylSamples& s, int k) { return matrix_to_lists(s.M.at(k)); });

  m.def("assemble_weyl",
        [](const TreeGraph& g, cplx rho) { return matrix_to_lists(assemble_weyl(g, rho)); },
        py::arg("graph"), py::arg("rho"), "Weyl matrix at one spectral point");
  m.def("sample_weyl",
        [](const TreeGraph& g, const RhoGridSpec& spec, int threads) {
          return sample_weyl(g, spec, threads);
        },
        py::arg("graph"), py::arg("spec"), py::arg("threads") = 0);
  m.def("write_weyl_csv",
        [](const std::string& path, const WeylSamples& s) { write_weyl_csv(path, s); });
  m.def("read_weyl_csv", &read_weyl_csv);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("N", &SolverConfig::N)
      .def_readwrite("Nc", &SolverConfig::Nc)
      .def_readwrite("K_D", &SolverConfig::K_D)
      .def_readwrite("K_N", &SolverConfig::K_N)
      .def_readwrite("xm_points", &SolverConfig::xm_points)
      .def_readwrite("drop_threshold", &SolverConfig::drop_threshold)
      .def_readwrite("grid_G", &SolverConfig::grid_G);

  py::class_<RecoveredEdge>(m, "RecoveredEdge")
      .def_readonly("edge_id", &RecoveredEdge::edge_id)
      .def_readonly("x", &RecoveredEdge::x)
      .def_readonly("q", &RecoveredEdge::q);

  py::class_<InverseRun>(m, "InverseRun")
      .def_readonly("edges", &InverseRun::edges)
      .def_readonly("report_json", &InverseRun::report_json);

  m.def("run_forward",
        [](const TreeGraph& g, const RhoGridSpec& spec, const std::string& out, int threads) {
          return run_forward(g, spec, out, threads);
        },
        py::arg("graph"), py::arg("spec"), py::arg("out_csv") = "", py::arg("threads") = 0);
  m.def("run_inverse",
        [](const TreeGraph& topo, const WeylSamples& s, const SolverConfig& cfg,
           const std::string& out_dir) { return run_inverse(topo, s, cfg, out_dir); },
        py::arg("topology"), py::arg("samples"), py::arg("config") = SolverConfig{},
        py::arg("out_dir") = "");

  m.def("recover_q_from_g0",
        [](const std::vector<double>& x, const std::vector<double>& g0, double L) {
          auto r = recover_q_from_g0(x, g0, L);
          return py::make_tuple(r.x, r.q);
        },
        py::arg("x"), py::arg("g0"), py::arg("L"),
        "potential from the first series coefficient, q = g0''/(g0+1)");
}
