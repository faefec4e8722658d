#include "glaudio/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "glaudio/error.hpp"

namespace glaudio {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OutOfRangeEdge: return "OutOfRangeEdge";
    case ErrorCode::SelfLoopInEdgeList: return "SelfLoopInEdgeList";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::MaskOverlap: return "MaskOverlap";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IsolatedVertexInNormalized: return "IsolatedVertexInNormalized";
    case ErrorCode::TimeOutOfRange: return "TimeOutOfRange";
    case ErrorCode::VertexOutOfRange: return "VertexOutOfRange";
    case ErrorCode::TooLargeForOracle: return "TooLargeForOracle";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NonIntegralSpectrum: return "NonIntegralSpectrum";
    case ErrorCode::RepeatedEigenvalues: return "RepeatedEigenvalues";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::BadDimensions: return "BadDimensions";
    case ErrorCode::TapeMismatch: return "TapeMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(num_nodes_), 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

int Graph::num_classes() const {
  int max_label = -1;
  for (int l : labels_) max_label = std::max(max_label, l);
  return max_label + 1;
}

struct GraphBuilder {
  static GraphBuild build(GraphInput input, const BuildOptions& options) {
    const int n = input.num_nodes;
    if (n < 0) throw Error(ErrorCode::DimensionMismatch, "negative vertex count");
    const auto un = static_cast<std::size_t>(n);

    if (input.features.rows() != n) {
      std::ostringstream msg;
      msg << "feature matrix has " << input.features.rows() << " rows, expected " << n;
      throw Error(ErrorCode::DimensionMismatch, msg.str());
    }
    if (input.labels.empty()) input.labels.assign(un, kUnlabeled);
    if (input.labels.size() != un) {
      throw Error(ErrorCode::DimensionMismatch, "label array length differs from vertex count");
    }
    if (input.targets.size() > 0 && input.targets.rows() != n) {
      throw Error(ErrorCode::DimensionMismatch, "target matrix row count differs from vertex count");
    }
    for (auto* mask : {&input.masks.train, &input.masks.val, &input.masks.test}) {
      if (mask->empty()) mask->assign(un, false);
      if (mask->size() != un) throw Error(ErrorCode::DimensionMismatch, "mask length differs from vertex count");
    }

    GraphBuild out;
    out.report.input_edges = input.edges.size();
    std::vector<Edge> edges;
    edges.reserve(input.edges.size());
    for (const auto& [a, b] : input.edges) {
      if (a < 0 || a >= n || b < 0 || b >= n) {
        std::ostringstream msg;
        msg << "edge (" << a << ", " << b << ") has an endpoint outside [0, " << n << ")";
        throw Error(ErrorCode::OutOfRangeEdge, msg.str());
      }
      if (a == b) {
        std::ostringstream msg;
        msg << "self-loop at vertex " << a << " in edge list";
        throw Error(ErrorCode::SelfLoopInEdgeList, msg.str());
      }
      if (a > b) ++out.report.reversed_edges_canonicalized;
      edges.push_back({std::min(a, b), std::max(a, b)});
    }
    std::sort(edges.begin(), edges.end());
    const auto last = std::unique(edges.begin(), edges.end());
    out.report.duplicate_edges_merged = static_cast<std::size_t>(edges.end() - last);
    edges.erase(last, edges.end());
    if (out.report.duplicate_edges_merged > 0) {
      std::ostringstream msg;
      msg << out.report.duplicate_edges_merged << " duplicate edge(s) merged";
      if (options.strict_duplicates) throw Error(ErrorCode::DuplicateEdge, msg.str());
      out.report.warnings.push_back(msg.str());
    }

    const bool regression = input.targets.size() > 0;
    for (std::size_t v = 0; v < un; ++v) {
      const int hits = int(input.masks.train[v]) + int(input.masks.val[v]) + int(input.masks.test[v]);
      if (hits > 1) {
        throw Error(ErrorCode::MaskOverlap, "vertex " + std::to_string(v) + " belongs to more than one split");
      }
      if (hits == 1 && !regression && input.labels[v] < 0) {
        throw Error(ErrorCode::LabelOutOfRange, "masked vertex " + std::to_string(v) + " has no label");
      }
      if (input.labels[v] < kUnlabeled) {
        throw Error(ErrorCode::LabelOutOfRange, "label below -1 at vertex " + std::to_string(v));
      }
    }

    Graph& g = out.graph;
    g.num_nodes_ = n;
    g.edges_ = std::move(edges);
    g.features_ = std::move(input.features);
    g.labels_ = std::move(input.labels);
    g.targets_ = std::move(input.targets);
    g.masks_ = std::move(input.masks);
    return out;
  }
};

GraphBuild build_graph(GraphInput input, const BuildOptions& options) {
  return GraphBuilder::build(std::move(input), options);
}

Graph permute_graph(const Graph& graph, const std::vector<int>& perm) {
  const int n = graph.num_nodes();
  if (static_cast<int>(perm.size()) != n) throw Error(ErrorCode::DimensionMismatch, "permutation length");
  GraphInput in;
  in.num_nodes = n;
  for (const auto& e : graph.edges()) in.edges.emplace_back(perm[e.u], perm[e.v]);
  in.features.resize(n, graph.feature_dim());
  in.labels.assign(static_cast<std::size_t>(n), kUnlabeled);
  if (graph.is_regression()) in.targets.resize(n, graph.targets().cols());
  for (auto* m : {&in.masks.train, &in.masks.val, &in.masks.test}) m->assign(static_cast<std::size_t>(n), false);
  for (int v = 0; v < n; ++v) {
    const int p = perm[v];
    in.features.row(p) = graph.features().row(v);
    in.labels[p] = graph.labels()[v];
    if (graph.is_regression()) in.targets.row(p) = graph.targets().row(v);
    in.masks.train[p] = graph.masks().train[v];
    in.masks.val[p] = graph.masks().val[v];
    in.masks.test[p] = graph.masks().test[v];
  }
  return build_graph(std::move(in)).graph;
}

std::vector<int> connected_components(int num_nodes, const std::vector<Edge>& edges) {
  std::vector<int> parent(static_cast<std::size_t>(num_nodes));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : edges) {
    const int a = find(e.u), b = find(e.v);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> comp(static_cast<std::size_t>(num_nodes), -1);
  std::vector<int> root_id(static_cast<std::size_t>(num_nodes), -1);
  int next = 0;
  for (int v = 0; v < num_nodes; ++v) {
    const int r = find(v);
    if (root_id[r] < 0) root_id[r] = next++;
    comp[v] = root_id[r];
  }
  return comp;
}

double CsrMatrix::entry(int r, int c) const {
  const auto begin = col_index.begin() + row_ptr[r];
  const auto end = col_index.begin() + row_ptr[r + 1];
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return 0.0;
  return values[static_cast<std::size_t>(it - col_index.begin())];
}

void CsrMatrix::apply_into(const NodeMatrix& x, NodeMatrix& out) const {
  if (x.rows() != cols) throw Error(ErrorCode::DimensionMismatch, "operator/vector dimension mismatch");
  out.resize(rows, x.cols());
  for (int r = 0; r < rows; ++r) {
    auto row = out.row(r);
    row.setZero();
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) row.noalias() += values[k] * x.row(col_index[k]);
  }
}

NodeMatrix CsrMatrix::apply(const NodeMatrix& x) const {
  NodeMatrix out;
  apply_into(x, out);
  return out;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) d(r, col_index[k]) = values[k];
  return d;
}

const char* to_string(OperatorVariant variant) noexcept {
  switch (variant) {
    case OperatorVariant::combinatorial: return "combinatorial";
    case OperatorVariant::normalized: return "normalized";
    case OperatorVariant::combinatorial_selfloop: return "combinatorial-selfloop";
    case OperatorVariant::normalized_selfloop: return "normalized-selfloop";
  }
  return "unknown";
}

OperatorVariant operator_variant_from_string(const std::string& name) {
  for (auto v : {OperatorVariant::combinatorial, OperatorVariant::normalized,
                 OperatorVariant::combinatorial_selfloop, OperatorVariant::normalized_selfloop}) {
    if (name == to_string(v)) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown operator variant '" + name + "'");
}

OperatorVariant operator_variant_for(bool normalized, bool self_loops) noexcept {
  if (normalized) return self_loops ? OperatorVariant::normalized_selfloop : OperatorVariant::normalized;
  return self_loops ? OperatorVariant::combinatorial_selfloop : OperatorVariant::combinatorial;
}

LaplacianOperator build_operator(const Graph& graph, OperatorVariant variant, const OperatorOptions& options) {
  const int n = graph.num_nodes();
  const auto deg = graph.degrees();
  const bool normalized =
      variant == OperatorVariant::normalized || variant == OperatorVariant::normalized_selfloop;
  const bool self_loops =
      variant == OperatorVariant::combinatorial_selfloop || variant == OperatorVariant::normalized_selfloop;

  LaplacianOperator op;
  op.variant = variant;

  std::vector<double> inv_sqrt(static_cast<std::size_t>(n), 0.0);
  int isolated = 0;
  for (int v = 0; v < n; ++v) {
    if (deg[v] > 0) {
      inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(deg[v]));
    } else {
      ++isolated;
    }
  }
  if (variant == OperatorVariant::normalized && isolated > 0) {
    const std::string msg = std::to_string(isolated) +
                            " isolated vertex(es) under the normalized Laplacian; D^-1/2 entry set to 0";
    if (options.strict_isolated) {
      throw Error(ErrorCode::IsolatedVertexInNormalized, msg);
    }
    op.warnings.push_back(msg);
  }

  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n));
  for (const auto& e : graph.edges()) {
    const double w = normalized ? -inv_sqrt[e.u] * inv_sqrt[e.v] : -1.0;
    rows[e.u].emplace_back(e.v, w);
    rows[e.v].emplace_back(e.u, w);
  }
  for (int v = 0; v < n; ++v) {
    double diag = normalized ? (deg[v] > 0 ? 1.0 : 0.0) : static_cast<double>(deg[v]);
    if (self_loops) diag += 1.0;
    if (diag != 0.0) rows[v].emplace_back(v, diag);
  }

  CsrMatrix& m = op.matrix;
  m.rows = m.cols = n;
  m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int v = 0; v < n; ++v) {
    auto& r = rows[v];
    std::sort(r.begin(), r.end());
    for (const auto& [c, w] : r) {
      m.col_index.push_back(c);
      m.values.push_back(w);
    }
    m.row_ptr[v + 1] = static_cast<int>(m.values.size());
  }

  const int max_deg = deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
  op.max_eigenvalue_bound = normalized ? 2.0 : 2.0 * max_deg;
  if (self_loops) op.max_eigenvalue_bound += 1.0;
  return op;
}

}  // namespace glaudio
