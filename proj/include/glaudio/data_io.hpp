#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "glaudio/graph.hpp"
#include "glaudio/types.hpp"

namespace glaudio {

using Json = nlohmann::json;

inline constexpr const char* kBundleFormatVersion = "1";

struct SparseRow {
  std::vector<int> indices;  // strictly ascending
  std::vector<double> values;
  friend bool operator==(const SparseRow&, const SparseRow&) = default;
};

struct Splits {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
  bool empty() const { return train.empty() && val.empty() && test.empty(); }
  friend bool operator==(const Splits&, const Splits&) = default;
};

/// Canonical on-disk dataset. Features are either dense rows or sparse
/// index lists; sparse rows whose values are all 1.0 serialize without a
/// values array.
struct GraphBundle {
  std::string format_version = kBundleFormatVersion;
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  int feature_dim = 0;
  bool sparse = false;
  NodeMatrix dense_features;           // n x feature_dim when !sparse
  std::vector<SparseRow> sparse_rows;  // n rows when sparse
  std::vector<int> labels;             // empty, or n entries (kUnlabeled allowed)
  NodeMatrix targets;                  // optional regression targets
  Splits splits;
  Json metadata = Json::object();      // name, class_names, split_source, ...

  NodeMatrix features() const;
  // Index ranges, sparse ordering and split disjointness.
  void validate() const;
  bool operator==(const GraphBundle& other) const;
};

Json bundle_to_json(const GraphBundle& bundle);
GraphBundle bundle_from_json(const Json& j);
void save_bundle(const GraphBundle& bundle, const std::string& path);
// ParseError carries line and column; VersionMismatch for other versions.
GraphBundle load_bundle(const std::string& path);
GraphBundle parse_bundle(const std::string& text, const std::string& source = "<string>");

struct IngestResult {
  GraphBundle bundle;
  std::size_t unknown_edges_dropped = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicate_edges_merged = 0;
  std::vector<std::string> warnings;
};

// Cora/CiteSeer raw format. Content rows "id f_1 .. f_k label", cites rows
// "cited citing". Ids map to indices in content order; class indices follow
// sorted class names.
IngestResult load_content_cites(const std::string& content_path, const std::string& cites_path);

// WebKB (Texas, Cornell, Wisconsin) as distributed with geom-gcn:
// "node_id<TAB>f1,f2,..<TAB>label" and "u<TAB>v" with a header line each.
IngestResult load_webkb(const std::string& features_labels_path, const std::string& edges_path);

// Seeded shuffle into disjoint (train, val, test) of rounded sizes. When the
// fractions sum to 1 the three sets cover all n vertices.
Splits make_splits(int n, std::array<double, 3> fractions, std::uint64_t seed);

// Two-or-more-class stochastic block model; vertex v has class v % num_classes.
// Features are one-hot classes plus N(0, feature_noise^2). Carries seeded
// 60/20/20 splits.
GraphBundle synth_sbm(int n, int num_classes, double p_in, double p_out, double feature_noise, std::uint64_t seed);

// Disjoint chains with k edges (k + 1 vertices). The head carries a bit
// (+1 / -1) in its single feature, every other vertex a random +-1; the
// tail's label is the head bit (1 for +1). Only tails are labeled; splits are
// 60/20/20 over chains.
GraphBundle synth_distance_task(int k, int num_chains, std::uint64_t seed);
int distance_task_head(int chain, int k);
int distance_task_tail(int chain, int k);

// Validates through build_graph. Missing splits give empty masks.
GraphBuild bundle_to_graph(const GraphBundle& bundle, const BuildOptions& options = {});

// "bundle" when the bundle carries splits (or the recorded split_source),
// "none" otherwise.
std::string split_provenance(const GraphBundle& bundle);

// Attaches seeded 60/20/20 splits over labeled vertices and records the
// provenance as "seeded:<seed>".
GraphBundle with_seeded_splits(GraphBundle bundle, std::uint64_t seed);

}  // namespace glaudio
