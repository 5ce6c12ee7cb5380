// Python bindings for the main solver operations: implicit surfaces, band
// meshing, the preconditioned CG solver, and the benchmark study driver.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bandfem/bench.hpp"
#include "bandfem/hessian_recovery.hpp"

namespace py = pybind11;
using namespace bandfem;

namespace {

template <int N>
void bind_surface(py::module_& m, const char* name) {
  py::class_<Surface<N>> cls(m, name);
  cls.def("signed_distance", &Surface<N>::signed_distance, py::arg("x"))
      .def("normal", &Surface<N>::normal, py::arg("x"))
      .def("hessian", &Surface<N>::hessian, py::arg("x"))
      .def("closest_point", &Surface<N>::closest_point, py::arg("x"))
      .def("max_band_width", &Surface<N>::max_band_width);
  if constexpr (N == 2) {
    cls.def_static("circle", &Surface<2>::circle, py::arg("radius"));
  } else {
    cls.def_static("sphere", &Surface<3>::sphere, py::arg("radius"));
    cls.def_static("torus", &Surface<3>::torus, py::arg("major_radius"),
                   py::arg("minor_radius"));
  }
}

template <int N>
void bind_mesh(py::module_& m, const char* name) {
  py::class_<BandMesh<N>>(m, name)
      .def_property_readonly("nodes",
                             [](const BandMesh<N>& mesh) {
                               py::array_t<double> arr(
                                   {static_cast<py::ssize_t>(mesh.nodes.size()),
                                    static_cast<py::ssize_t>(N)});
                               auto a = arr.template mutable_unchecked<2>();
                               for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
                                 for (int j = 0; j < N; ++j) a(i, j) = mesh.nodes[i][j];
                               return arr;
                             })
      .def_property_readonly("elements",
                             [](const BandMesh<N>& mesh) {
                               py::array_t<int> arr(
                                   {static_cast<py::ssize_t>(mesh.elems.size()),
                                    static_cast<py::ssize_t>(N + 1)});
                               auto a = arr.template mutable_unchecked<2>();
                               for (std::size_t e = 0; e < mesh.elems.size(); ++e)
                                 for (int j = 0; j <= N; ++j) a(e, j) = mesh.elems[e][j];
                               return arr;
                             })
      .def_readonly("level", &BandMesh<N>::level)
      .def("h_max", &BandMesh<N>::h_max)
      .def("h_min", &BandMesh<N>::h_min);
}

template <int N>
BandMesh<N> make_band_mesh(const Surface<N>& surface, double d, double h) {
  return build_band_mesh(BandSpec<N>{surface, d}, h);
}

template <int N>
BandMesh<N> refine_band_mesh(const BandMesh<N>& mesh, const Surface<N>& surface, double d) {
  return refine(mesh, BandSpec<N>{surface, d});
}

py::dict pcg_py(int n, const std::vector<int>& rows, const std::vector<int>& cols,
                const std::vector<double>& vals, const std::vector<double>& b,
                double tol, int maxit) {
  if (rows.size() != cols.size() || rows.size() != vals.size())
    throw py::value_error("rows, cols, vals must have the same length");
  std::vector<Triplet> triplets(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k)
    triplets[k] = Triplet{rows[k], cols[k], vals[k]};
  const CsrMatrix A = CsrMatrix::from_triplets(n, std::move(triplets));
  const PcgResult result = pcg(A, b, tol, maxit);
  py::dict out;
  out["x"] = py::array_t<double>(static_cast<py::ssize_t>(result.x.size()),
                                 result.x.data());
  out["iterations"] = result.report.iterations;
  out["rel_residual"] = result.report.rel_residual;
  out["converged"] = result.report.converged;
  return out;
}

py::dict run_study_py(const std::string& case_name, const std::string& hessian,
                      int levels, double d, double h0, double tol,
                      const std::string& mesh) {
  StudyConfig cfg;
  cfg.case_name = case_name;
  if (hessian == "exact")
    cfg.hessian = HessianMode::exact;
  else if (hessian == "recovered")
    cfg.hessian = HessianMode::recovered;
  else
    throw ConfigError("hessian must be 'exact' or 'recovered', got '" + hessian + "'");
  cfg.levels = levels;
  cfg.band = d;
  cfg.h0 = h0;
  cfg.tol = tol;
  cfg.mesh = mesh;

  const StudyResult result = run_benchmark(cfg);
  py::list rows;
  for (const SurfaceErrorRow& r : result.rows) {
    py::dict row;
    row["level"] = r.level;
    row["dofs"] = r.dofs;
    row["h"] = r.h;
    row["L2"] = r.l2;
    row["L2_order"] = r.l2_order;
    row["Cnorm"] = r.cnorm;
    row["Cnorm_order"] = r.cnorm_order;
    row["normal_deriv"] = r.normal_deriv;
    row["iters"] = r.iters;
    rows.append(row);
  }
  py::dict out;
  out["rows"] = rows;
  out["solver_failed"] = result.solver_failed;
  out["notes"] = result.notes;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Narrow-band finite element solver for PDEs on implicit surfaces";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  bind_surface<2>(m, "Surface2");
  bind_surface<3>(m, "Surface3");
  bind_mesh<2>(m, "BandMesh2");
  bind_mesh<3>(m, "BandMesh3");

  m.def("build_band_mesh", &make_band_mesh<2>, py::arg("surface"), py::arg("d"),
        py::arg("h"), "Mesh the band {|phi| < d} around a plane curve");
  m.def("build_band_mesh", &make_band_mesh<3>, py::arg("surface"), py::arg("d"),
        py::arg("h"), "Mesh the band {|phi| < d} around a surface");
  m.def("refine", &refine_band_mesh<2>, py::arg("mesh"), py::arg("surface"), py::arg("d"),
        "Regular red refinement with boundary re-snapping");
  m.def("refine", &refine_band_mesh<3>, py::arg("mesh"), py::arg("surface"), py::arg("d"),
        "Regular red refinement with boundary re-snapping");

  m.def("pcg", &pcg_py, py::arg("n"), py::arg("rows"), py::arg("cols"), py::arg("vals"),
        py::arg("b"), py::arg("tol") = 1e-9, py::arg("maxit") = -1,
        "Jacobi-preconditioned CG on a matrix given in triplet form");

  m.def("run_study", &run_study_py, py::arg("case"), py::arg("hessian") = "exact",
        py::arg("levels") = -1, py::arg("d") = -1.0, py::arg("h0") = -1.0,
        py::arg("tol") = 1e-9, py::arg("mesh") = "band",
        "Run a refinement study for one benchmark case; returns rows of the "
        "convergence table");
}
