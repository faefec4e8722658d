#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "glaudio/types.hpp"

namespace glaudio {

struct Edge {
  int u = 0;
  int v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Masks {
  std::vector<bool> train;
  std::vector<bool> val;
  std::vector<bool> test;
};

// Label value for vertices that carry no class (never allowed inside a mask).
inline constexpr int kUnlabeled = -1;

/// Undirected simple graph with node features, labels and split masks.
///
/// Edges are canonical (u < v), sorted and unique. Self-loops never appear in
/// the edge list; they enter only through the operator variant. Immutable
/// after construction through build_graph().
class Graph {
 public:
  Graph() = default;

  int num_nodes() const { return num_nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const NodeMatrix& features() const { return features_; }
  int feature_dim() const { return static_cast<int>(features_.cols()); }
  const std::vector<int>& labels() const { return labels_; }
  // Regression targets (n x d1); empty for classification graphs.
  const NodeMatrix& targets() const { return targets_; }
  bool is_regression() const { return targets_.size() > 0; }
  const Masks& masks() const { return masks_; }

  std::vector<int> degrees() const;
  // Number of classes implied by the labels (max label + 1, 0 if none).
  int num_classes() const;

 private:
  friend struct GraphBuilder;
  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  NodeMatrix features_;
  std::vector<int> labels_;
  NodeMatrix targets_;
  Masks masks_;
};

struct GraphInput {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  NodeMatrix features;
  std::vector<int> labels;  // empty => all unlabeled
  NodeMatrix targets;       // optional regression targets
  Masks masks;              // each empty => all false
};

struct BuildOptions {
  // Reject repeated edges instead of merging them with a warning.
  bool strict_duplicates = false;
};

struct ValidationReport {
  std::size_t input_edges = 0;
  std::size_t duplicate_edges_merged = 0;
  std::size_t reversed_edges_canonicalized = 0;
  std::vector<std::string> warnings;
};

struct GraphBuild {
  Graph graph;
  ValidationReport report;
};

GraphBuild build_graph(GraphInput input, const BuildOptions& options = {});

// Relabels vertex v as perm[v]. Used by permutation tests and tooling.
Graph permute_graph(const Graph& graph, const std::vector<int>& perm);

// Connected component id per vertex (ids assigned in vertex order).
std::vector<int> connected_components(int num_nodes, const std::vector<Edge>& edges);

/// Compressed sparse row matrix with column indices ascending in each row.
/// Row products accumulate in stored order, so apply() is bit-deterministic.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_index;
  std::vector<double> values;

  std::size_t nonzeros() const { return values.size(); }
  double entry(int r, int c) const;
  NodeMatrix apply(const NodeMatrix& x) const;
  void apply_into(const NodeMatrix& x, NodeMatrix& out) const;
  Eigen::MatrixXd to_dense() const;
};

enum class OperatorVariant {
  combinatorial,           // L = D - A
  normalized,              // N = D^-1/2 L D^-1/2
  combinatorial_selfloop,  // I + L
  normalized_selfloop,     // I + N
};

const char* to_string(OperatorVariant variant) noexcept;
OperatorVariant operator_variant_from_string(const std::string& name);
OperatorVariant operator_variant_for(bool normalized, bool self_loops) noexcept;

struct LaplacianOperator {
  OperatorVariant variant = OperatorVariant::combinatorial;
  CsrMatrix matrix;
  // Upper bound on the spectrum: 2*max_degree (combinatorial) or 2
  // (normalized), plus 1 with self-loops.
  double max_eigenvalue_bound = 0.0;
  std::vector<std::string> warnings;

  int dimension() const { return matrix.rows; }
  NodeMatrix apply(const NodeMatrix& x) const { return matrix.apply(x); }
};

struct OperatorOptions {
  // Throw IsolatedVertexInNormalized instead of warning.
  bool strict_isolated = false;
};

LaplacianOperator build_operator(const Graph& graph, OperatorVariant variant,
                                 const OperatorOptions& options = {});

}  // namespace glaudio
