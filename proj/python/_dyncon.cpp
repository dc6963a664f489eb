#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dyncon/bench.hpp"
#include "dyncon/blocked.hpp"
#include "dyncon/connectivity.hpp"
#include "dyncon/hdt.hpp"
#include "dyncon/oracle.hpp"

namespace py = pybind11;
using namespace dyncon;

namespace {

std::vector<EdgeKey> to_edges(const std::vector<std::pair<VertexId, VertexId>>& pairs) {
  std::vector<EdgeKey> out;
  out.reserve(pairs.size());
  for (const auto& [u, v] : pairs) out.emplace_back(u, v);
  return out;
}

std::vector<std::pair<VertexId, VertexId>> to_pairs(const std::vector<EdgeKey>& edges) {
  std::vector<std::pair<VertexId, VertexId>> out;
  out.reserve(edges.size());
  for (const EdgeKey& e : edges) out.emplace_back(e.a, e.b);
  return out;
}

py::dict stats_dict(const Stats& s) {
  py::dict d;
  d["inserts"] = s.inserts;
  d["deletes"] = s.deletes;
  d["nontree_deletes"] = s.nontree_deletes;
  d["fetches"] = s.fetches;
  d["pushdowns"] = s.pushdowns;
  d["searches"] = s.searches;
  d["links"] = s.links;
  d["cuts"] = s.cuts;
  d["bytes"] = s.bytes;
  d["peak_bytes"] = s.peak_bytes;
  return d;
}

// Violation messages from the structure's auditor; empty when clean.
std::vector<std::string> audit_any(DynamicConnectivity& a) {
  std::vector<std::string> out;
  const ClusterForest* f = nullptr;
  AuditOptions opt;
  if (auto* cf = dynamic_cast<CFConnectivity*>(&a)) {
    f = &cf->forest();
    opt.tree_connectivity = cf->tracking();
  } else if (auto* b = dynamic_cast<BlockedConnectivity*>(&a)) {
    f = &b->forest();
  } else if (auto* h = dynamic_cast<HdtConnectivity*>(&a)) {
    return h->audit();
  }
  if (f == nullptr) return out;
  for (const Violation& v : audit(*f, opt).violations) out.push_back(v.check + ": " + v.detail);
  return out;
}

py::dict report_dict(const RunReport& r) {
  py::dict d;
  d["algo"] = r.algo;
  d["ok"] = r.ok;
  d["failed_op"] = r.failed_op;
  d["failure"] = r.failure;
  d["query_hash"] = r.query_hash;
  d["stats"] = stats_dict(r.final_stats);
  d["csv"] = format_report_csv(r.rows);
  return d;
}

}  // namespace

PYBIND11_MODULE(_dyncon, m) {
  m.doc() = "Fully dynamic graph connectivity: cluster forests, blocked cluster forests and an HDT baseline";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<QueryError>(m, "QueryError", PyExc_ValueError);
  py::register_exception<StructuralError>(m, "StructuralError", PyExc_RuntimeError);

  py::class_<DynamicConnectivity>(m, "Connectivity")
      .def("insert", &DynamicConnectivity::insert, py::arg("u"), py::arg("v"))
      .def("erase", &DynamicConnectivity::erase, py::arg("u"), py::arg("v"))
      .def("connected", &DynamicConnectivity::connected, py::arg("u"), py::arg("v"))
      .def(
          "batch_insert",
          [](DynamicConnectivity& a, const std::vector<std::pair<VertexId, VertexId>>& es) {
            a.batch_insert(to_edges(es));
          },
          py::arg("edges"))
      .def(
          "batch_erase",
          [](DynamicConnectivity& a, const std::vector<std::pair<VertexId, VertexId>>& es) {
            a.batch_erase(to_edges(es));
          },
          py::arg("edges"))
      .def("stats", [](const DynamicConnectivity& a) { return stats_dict(a.stats()); })
      .def("audit", &audit_any)
      .def_property_readonly("name", &DynamicConnectivity::name)
      .def_property_readonly("n", &DynamicConnectivity::n);

  m.attr("ALGORITHMS") = kAlgorithms;
  m.def(
      "make", [](const std::string& algo, int n) { return make_algorithm(algo, n); }, py::arg("algo"),
      py::arg("n"));

  m.def(
      "grid_graph", [](int rows, int cols) { return to_pairs(grid_graph(rows, cols).edges); }, py::arg("rows"),
      py::arg("cols"));
  m.def(
      "random_graph", [](int n, std::int64_t edges, std::uint64_t seed) { return to_pairs(random_graph(n, edges, seed).edges); },
      py::arg("n"), py::arg("m"), py::arg("seed") = 1);
  m.def(
      "gen_stream",
      [](int n, const std::vector<std::pair<VertexId, VertexId>>& edges, int stages, std::uint64_t seed) {
        Graph g;
        g.n = n;
        g.edges = to_edges(edges);
        return format_stream(gen_stream(g, stages, seed));
      },
      py::arg("n"), py::arg("edges"), py::arg("stages"), py::arg("seed") = 1);
  m.def(
      "random_stream", [](int n, std::size_t ops, std::uint64_t seed) { return format_stream(random_stream(n, ops, seed)); },
      py::arg("n"), py::arg("ops"), py::arg("seed") = 1);
  m.def(
      "run_stream",
      [](const std::string& algo, const std::string& stream_text, bool audit, bool verify) {
        const UpdateStream s = parse_stream(stream_text, "<stream>");
        RunReport r;
        {
          py::gil_scoped_release release;
          r = run_stream(algo, s, {audit, verify});
        }
        return report_dict(r);
      },
      py::arg("algo"), py::arg("stream"), py::arg("audit") = false, py::arg("verify") = false);
}
