#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "glaudio/analysis.hpp"
#include "glaudio/data_io.hpp"
#include "glaudio/error.hpp"
#include "glaudio/spectral.hpp"
#include "glaudio/trainer.hpp"
#include "glaudio/wav.hpp"
#include "glaudio/wave.hpp"

namespace py = pybind11;
using namespace glaudio;

namespace {

// Stack a list of n x d snapshots into a (count, n, d) array.
py::array_t<double> stack(const std::vector<NodeMatrix>& snaps) {
  const auto count = static_cast<py::ssize_t>(snaps.size());
  const py::ssize_t n = snaps.empty() ? 0 : snaps.front().rows();
  const py::ssize_t d = snaps.empty() ? 0 : snaps.front().cols();
  py::array_t<double> out({count, n, d});
  auto v = out.mutable_unchecked<3>();
  for (py::ssize_t i = 0; i < count; ++i) {
    for (py::ssize_t r = 0; r < n; ++r) {
      for (py::ssize_t c = 0; c < d; ++c) v(i, r, c) = snaps[static_cast<std::size_t>(i)](r, c);
    }
  }
  return out;
}

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_python(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

std::vector<bool> mask_from(const std::optional<std::vector<int>>& idx, int n) {
  std::vector<bool> m;
  if (!idx) return m;
  m.assign(static_cast<std::size_t>(n), false);
  for (int v : *idx) {
    if (v < 0 || v >= n) throw Error(ErrorCode::VertexOutOfRange, "mask index " + std::to_string(v));
    m[static_cast<std::size_t>(v)] = true;
  }
  return m;
}

Graph make_graph(int num_nodes, std::vector<std::pair<int, int>> edges, std::optional<NodeMatrix> features,
                 std::optional<std::vector<int>> labels, std::optional<std::vector<int>> train,
                 std::optional<std::vector<int>> val, std::optional<std::vector<int>> test) {
  GraphInput in;
  in.num_nodes = num_nodes;
  in.edges = std::move(edges);
  in.features = features ? *features : NodeMatrix::Zero(num_nodes, 1);
  if (labels) in.labels = *labels;
  in.masks = {mask_from(train, num_nodes), mask_from(val, num_nodes), mask_from(test, num_nodes)};
  return build_graph(std::move(in)).graph;
}

Graph graph_from_bundle(const GraphBundle& b) { return bundle_to_graph(b).graph; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Graph wave encoder, spectral oracle and sequence decoders";
  py::register_exception<Error>(m, "GlaudioError", PyExc_ValueError);

  py::enum_<OperatorVariant>(m, "OperatorVariant")
      .value("combinatorial", OperatorVariant::combinatorial)
      .value("normalized", OperatorVariant::normalized)
      .value("combinatorial_selfloop", OperatorVariant::combinatorial_selfloop)
      .value("normalized_selfloop", OperatorVariant::normalized_selfloop);

  py::class_<Graph>(m, "Graph")
      .def(py::init(&make_graph), py::arg("num_nodes"), py::arg("edges"), py::arg("features") = py::none(),
           py::arg("labels") = py::none(), py::arg("train") = py::none(), py::arg("val") = py::none(),
           py::arg("test") = py::none())
      .def_property_readonly("num_nodes", &Graph::num_nodes)
      .def_property_readonly("features", &Graph::features)
      .def_property_readonly("labels", &Graph::labels)
      .def_property_readonly("degrees", &Graph::degrees)
      .def_property_readonly("edges", [](const Graph& g) {
        std::vector<std::pair<int, int>> e;
        for (const auto& x : g.edges()) e.emplace_back(x.u, x.v);
        return e;
      });

  py::class_<LaplacianOperator>(m, "LaplacianOperator")
      .def_property_readonly("variant", [](const LaplacianOperator& op) { return op.variant; })
      .def_readonly("max_eigenvalue_bound", &LaplacianOperator::max_eigenvalue_bound)
      .def_readonly("warnings", &LaplacianOperator::warnings)
      .def("dense", [](const LaplacianOperator& op) { return op.matrix.to_dense(); })
      .def("apply", [](const LaplacianOperator& op, const NodeMatrix& x) { return NodeMatrix(op.apply(x)); });

  m.def(
      "build_operator",
      [](const Graph& g, const std::string& variant) { return build_operator(g, operator_variant_from_string(variant)); },
      py::arg("graph"), py::arg("variant") = "combinatorial");

  m.def(
      "propagate",
      [](const LaplacianOperator& op, const NodeMatrix& x, double h, int num_steps) {
        const auto s = propagate(op, x, WaveConfig{num_steps, h});
        return py::make_tuple(stack(s.positions), stack(s.velocities));
      },
      py::arg("op"), py::arg("x"), py::arg("h"), py::arg("num_steps"),
      "Returns (positions, velocities), each shaped (num_steps + 1, n, d).");

  py::class_<SpectralDecomposition>(m, "SpectralDecomposition")
      .def_readonly("eigenvalues", &SpectralDecomposition::eigenvalues)
      .def_readonly("eigenvectors", &SpectralDecomposition::eigenvectors);
  m.def(
      "eigendecompose",
      [](const LaplacianOperator& op, int oracle_limit) { return eigendecompose(op, oracle_limit); },
      py::arg("op"), py::arg("oracle_limit") = kDefaultOracleLimit);
  m.def(
      "exact_signal",
      [](const SpectralDecomposition& dec, const NodeMatrix& x, const std::vector<double>& times) {
        return stack(exact_signal(dec, x, times));
      },
      py::arg("dec"), py::arg("x"), py::arg("times"));
  m.def(
      "compare_encodings",
      [](const LaplacianOperator& og, const NodeMatrix& xg, const LaplacianOperator& oh, const NodeMatrix& xh,
         int n_max, const std::vector<double>& times) {
        const auto c = compare_encodings(og, xg, oh, xh, n_max, times);
        py::dict d;
        d["moments_agree"] = c.moments_agree;
        d["signals_agree"] = c.signals_agree;
        d["first_differing_moment"] = c.first_differing_moment;
        d["consistent"] = c.consistent();
        return d;
      },
      py::arg("op_g"), py::arg("x_g"), py::arg("op_h"), py::arg("x_h"), py::arg("n_max"), py::arg("times"));
  m.def(
      "receptive_field",
      [](const SpectralDecomposition& dec, int v) {
        const auto rf = receptive_field(dec, v);
        return py::make_tuple(rf.member_indices, rf.unique_spectrum);
      },
      py::arg("dec"), py::arg("vertex"));

  py::class_<GraphBundle>(m, "GraphBundle")
      .def_readonly("num_nodes", &GraphBundle::num_nodes)
      .def_readonly("edges", &GraphBundle::edges)
      .def_readonly("labels", &GraphBundle::labels)
      .def_property_readonly("features", &GraphBundle::features)
      .def("to_graph", &graph_from_bundle)
      .def("to_json", [](const GraphBundle& b) { return to_python(bundle_to_json(b)); })
      .def("__eq__", [](const GraphBundle& a, const GraphBundle& b) { return a == b; });
  m.def("load_bundle", &load_bundle, py::arg("path"));
  m.def("save_bundle", &save_bundle, py::arg("bundle"), py::arg("path"));
  m.def(
      "load_content_cites", [](const std::string& c, const std::string& e) { return load_content_cites(c, e).bundle; },
      py::arg("content_path"), py::arg("cites_path"));
  m.def("with_seeded_splits", &with_seeded_splits, py::arg("bundle"), py::arg("seed"));
  m.def("split_provenance", &split_provenance, py::arg("bundle"));
  m.def("synth_sbm", &synth_sbm, py::arg("n"), py::arg("num_classes"), py::arg("p_in"), py::arg("p_out"),
        py::arg("feature_noise"), py::arg("seed"));
  m.def("synth_distance_task", &synth_distance_task, py::arg("k"), py::arg("num_chains"), py::arg("seed"));

  m.def(
      "default_config", [] { return to_python(TrainConfig{}.to_json()); }, "Default training configuration as a dict.");
  m.def(
      "train",
      [](const Graph& g, const py::object& config, const std::string& provenance) {
        const TrainConfig c = TrainConfig::from_json(from_python(config));
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(g, c, provenance);
        }
        return to_python(r.report.to_json());
      },
      py::arg("graph"), py::arg("config"), py::arg("split_provenance") = "bundle",
      "Trains with a config dict (keys as in default_config) and returns the report.");

  m.def(
      "convergence_study",
      [](const LaplacianOperator& op, const NodeMatrix& x, double h, double stop_time, int levels) {
        const auto r = convergence_study(op, x, h, stop_time, levels);
        std::vector<double> dev;
        for (const auto& l : r.levels) dev.push_back(l.max_deviation);
        return py::make_tuple(r.order, dev);
      },
      py::arg("op"), py::arg("x"), py::arg("h"), py::arg("stop_time"), py::arg("levels") = 3,
      "Returns (order, max deviation per level).");
  m.def("dirichlet_energy", &dirichlet_energy, py::arg("op"), py::arg("x"));
  m.def("oversmoothing_metric", &oversmoothing_metric, py::arg("op"), py::arg("y"));
  m.def(
      "energy_drift",
      [](const LaplacianOperator& op, const NodeMatrix& x, double h, int num_steps) {
        return energy_trace(propagate(op, x, WaveConfig{num_steps, h}), op).max_relative_drift;
      },
      py::arg("op"), py::arg("x"), py::arg("h"), py::arg("num_steps"));

  m.def(
      "synthesize_audio",
      [](const LaplacianOperator& op, const NodeMatrix& x, std::optional<int> vertex, int sample_rate,
         double duration) {
        WavOptions o;
        o.sample_rate = sample_rate;
        o.duration = duration;
        const auto a = synthesize_audio(op, x, vertex, o);
        return py::make_tuple(py::array_t<double>(static_cast<py::ssize_t>(a.samples.size()), a.samples.data()),
                              a.time_scale, a.route);
      },
      py::arg("op"), py::arg("x"), py::arg("vertex") = py::none(), py::arg("sample_rate") = 44100,
      py::arg("duration") = 2.0, "Returns (samples, time_scale, route).");
  m.def("write_wav", &write_wav, py::arg("path"), py::arg("samples"), py::arg("sample_rate"));
}
