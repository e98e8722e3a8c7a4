#include "discwalk/cli.hpp"
#include "discwalk/errors.hpp"
#include "discwalk/graph.hpp"
#include "discwalk/linalg.hpp"
#include "discwalk/matrix_walk.hpp"
#include "discwalk/sketches.hpp"
#include "discwalk/sparsify.hpp"
#include "discwalk/vector_walk.hpp"
#include "discwalk/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace discwalk;

namespace {

SymMatrix to_sym(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidInput("square matrix required");
  if (!a.allFinite()) throw InvalidInput("matrix has non-finite entries");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InvalidInput("matrix is not symmetric");
  return SymMatrix::from_upper(a);
}

std::vector<SymMatrix> to_family(const std::vector<Matrix>& mats) {
  std::vector<SymMatrix> out;
  out.reserve(mats.size());
  for (const auto& m : mats) out.push_back(to_sym(m));
  return out;
}

std::vector<Vector> rows_of(const Matrix& a) {
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(a.rows()));
  for (Index i = 0; i < a.rows(); ++i) out.push_back(a.row(i).transpose());
  return out;
}

Subspace subspace_from_rows(const std::optional<Matrix>& rows, Index m) {
  if (!rows || rows->rows() == 0) return Subspace::full(m);
  if (rows->cols() != m) throw InvalidInput("constraint rows have the wrong width");
  return nullspace(*rows);
}

py::dict report_dict(const ApproxReport& r) {
  py::dict d;
  d["kind"] = to_string(r.kind);
  d["measured_eps"] = r.measured_eps;
  d["kernel_ok"] = r.kernel_ok;
  d["degree_max_dev"] = r.degree_max_dev;
  d["support_size"] = r.support_size;
  d["target"] = r.target;
  d["pass"] = r.pass;
  return d;
}

Graph make_graph(Index n, const std::vector<std::tuple<Index, Index, double>>& edges, bool directed) {
  std::vector<Edge> es;
  es.reserve(edges.size());
  for (const auto& [u, v, w] : edges) es.push_back({u, v, w});
  return Graph(n, std::move(es), directed);
}

}  // namespace

PYBIND11_MODULE(_discwalk, m) {
  m.doc() = "Deterministic discrepancy walks and spectral sparsifiers";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  static py::exception<InvalidInput> invalid(m, "InvalidInput", PyExc_ValueError);
  static py::exception<SubspaceExhausted> exhausted(m, "SubspaceExhausted", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidInput& e) {
      PyErr_SetString(invalid.ptr(), e.what());
    } catch (const ParseError& e) {
      PyErr_SetString(invalid.ptr(), e.what());
    } catch (const SubspaceExhausted& e) {
      PyErr_SetString(exhausted.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(base.ptr(), e.what());
    }
  });

  py::class_<Graph>(m, "Graph")
      .def(py::init(&make_graph), py::arg("n"), py::arg("edges"), py::arg("directed") = false)
      .def_property_readonly("n", &Graph::n)
      .def_property_readonly("directed", &Graph::directed)
      .def_property_readonly("edge_count", &Graph::edge_count)
      .def_property_readonly("edges",
                             [](const Graph& g) {
                               std::vector<std::tuple<Index, Index, double>> out;
                               for (const auto& e : g.edges()) out.emplace_back(e.u, e.v, e.w);
                               return out;
                             })
      .def("degrees", &Graph::degrees)
      .def("laplacian", [](const Graph& g) { return laplacian(g).dense(); })
      .def("unsigned_laplacian", [](const Graph& g) { return unsigned_laplacian(g).dense(); })
      .def("normalized_laplacian", [](const Graph& g) { return normalized_laplacian(g).dense(); })
      .def("__repr__", [](const Graph& g) {
        return "Graph(n=" + std::to_string(g.n()) + ", edges=" + std::to_string(g.edge_count()) +
               (g.directed() ? ", directed)" : ")");
      });

  m.def("parse_edge_list", &cli::parse_edge_list, py::arg("text"));
  m.def("serialize", &cli::serialize, py::arg("graph"));

  m.def(
      "eigh",
      [](const Matrix& a) {
        const EigenDecomposition e = eigh(to_sym(a));
        return py::make_tuple(e.values, e.vectors);
      },
      py::arg("a"));
  m.def("operator_norm", [](const Matrix& a) { return operator_norm(to_sym(a)); }, py::arg("a"));
  m.def(
      "nullspace_basis", [](const Matrix& rows) { return nullspace(rows).basis(); }, py::arg("rows"));

  m.def(
      "partial_color",
      [](const std::vector<Matrix>& family, const std::optional<Matrix>& constraint_rows) {
        const auto fam = to_family(family);
        const Index mm = static_cast<Index>(fam.size());
        const PartialColoring pc = partial_color(fam, subspace_from_rows(constraint_rows, mm));
        py::dict d;
        d["x"] = pc.x;
        d["norm"] = pc.norm;
        d["frozen"] = pc.frozen;
        d["iterations"] = pc.iterations;
        d["bound"] = fam.empty() ? 0.0 : partial_color_bound(fam[0].dim(), mm);
        return d;
      },
      py::arg("family"), py::arg("constraint_rows") = py::none());
  m.def(
      "complete_coloring",
      [](const std::vector<Matrix>& family, const std::optional<Matrix>& constraint_rows, long min_size) {
        const auto fam = to_family(family);
        PartialColorOptions o;
        o.min_size = min_size;
        const FullColoring fc = complete_coloring(fam, subspace_from_rows(constraint_rows, static_cast<Index>(fam.size())), o);
        py::dict d;
        d["x"] = fc.x;
        d["norm"] = fc.norm;
        d["rounds"] = fc.rounds;
        return d;
      },
      py::arg("family"), py::arg("constraint_rows") = py::none(), py::arg("min_size") = 40);
  m.def(
      "vector_partial_color",
      [](const Matrix& a, const std::optional<Matrix>& constraint_rows) {
        const VectorColoring vc = vector_partial_color(rows_of(a), subspace_from_rows(constraint_rows, a.cols()));
        py::dict d;
        d["x"] = vc.x;
        d["frozen"] = vc.frozen;
        d["iterations"] = vc.iterations;
        d["max_discrepancy_ratio"] = vc.max_discrepancy_ratio;
        return d;
      },
      py::arg("constraints"), py::arg("constraint_rows") = py::none());
  m.def(
      "brute_force_min_discrepancy",
      [](const std::vector<Matrix>& family) {
        const BruteForceResult r = brute_force_min_discrepancy(to_family(family));
        return py::make_tuple(r.x, r.norm);
      },
      py::arg("family"));

  m.def(
      "spectral_sparsify",
      [](const Graph& g, double eps, long c_support) {
        SparsifyOptions o;
        o.c_support = c_support;
        return spectral_sparsify(g, eps, o).graph;
      },
      py::arg("graph"), py::arg("eps"), py::arg("c_support") = 1024);
  m.def(
      "uc_sparsify",
      [](const Graph& g, double eps, long c_support) {
        SparsifyOptions o;
        o.c_support = c_support;
        return uc_sparsify(g, eps, o).graph;
      },
      py::arg("graph"), py::arg("eps"), py::arg("c_support") = 1024);
  m.def(
      "sv_sparsify",
      [](const Graph& g, double eps, std::optional<double> phi, long c_support) {
        SparsifyOptions o;
        o.c_support = c_support;
        return sv_sparsify(g, eps, phi, o).graph;
      },
      py::arg("graph"), py::arg("eps"), py::arg("phi_target") = py::none(), py::arg("c_support") = 1024);
  m.def(
      "sketch",
      [](const Graph& g, const Matrix& vectors, double eps) { return sketch(g, rows_of(vectors), eps).graph; },
      py::arg("graph"), py::arg("vectors"), py::arg("eps"));
  m.def(
      "resistance_sparsify", [](const Graph& g, double eps) { return resistance_sparsify(g, eps).graph; },
      py::arg("graph"), py::arg("eps"));
  m.def(
      "expander_decompose",
      [](const Graph& g, std::optional<double> phi) {
        const Decomposition d = expander_decompose(g, phi);
        py::list out;
        for (const auto& p : d.pieces) {
          py::dict piece;
          piece["edges"] = p.edges;
          piece["vertices"] = p.vertices;
          piece["lambda2"] = p.lambda2;
          out.append(piece);
        }
        return out;
      },
      py::arg("graph"), py::arg("phi_target") = py::none());

  m.def("check_spectral", [](const Graph& g, const Graph& h, double t) { return report_dict(check_spectral(g, h, t)); });
  m.def("check_uc", [](const Graph& g, const Graph& h, double t) { return report_dict(check_uc_undirected(g, h, t)); });
  m.def("check_sv", [](const Graph& g, const Graph& h, double t) { return report_dict(check_sv(g, h, t)); });
  m.def("check_sketch", [](const Graph& g, const Graph& h, const Matrix& vectors, double t) {
    return report_dict(check_sketch(g, h, rows_of(vectors), t));
  });
  m.def("check_resistance",
        [](const Graph& g, const Graph& h, double t) { return report_dict(check_resistance(g, h, t)); });
  m.def("effective_resistance", &effective_resistance, py::arg("graph"), py::arg("i"), py::arg("j"));
}
