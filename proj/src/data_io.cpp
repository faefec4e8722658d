#include "glaudio/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "glaudio/error.hpp"

namespace glaudio {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

double parse_number(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::MalformedRow, where + ": '" + tok + "' is not a number");
  }
}

std::string stem(const std::string& path) {
  const auto slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

SparseRow sparse_from_dense(const std::vector<double>& row) {
  SparseRow r;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] != 0.0) {
      r.indices.push_back(static_cast<int>(j));
      r.values.push_back(row[j]);
    }
  }
  return r;
}

// Symmetrizes directed pairs into canonical sorted undirected edges.
void finish_edges(IngestResult& res, const std::vector<std::pair<int, int>>& directed) {
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : directed) {
    if (a == b) {
      ++res.self_loops_dropped;
      continue;
    }
    if (!seen.emplace(std::min(a, b), std::max(a, b)).second) ++res.duplicate_edges_merged;
  }
  res.bundle.edges.assign(seen.begin(), seen.end());
  if (res.unknown_edges_dropped > 0) {
    res.warnings.push_back("UnknownId: dropped " + std::to_string(res.unknown_edges_dropped) +
                           " edge(s) referencing unknown ids");
  }
  if (res.self_loops_dropped > 0) {
    res.warnings.push_back("SelfLoop: dropped " + std::to_string(res.self_loops_dropped) + " self-citation(s)");
  }
  if (res.duplicate_edges_merged > 0) {
    res.warnings.push_back("DuplicateEdge: merged " + std::to_string(res.duplicate_edges_merged) +
                           " repeated or reversed edge(s)");
  }
}

Json matrix_to_json(const NodeMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(m.row(i).data(), m.row(i).data() + m.cols());
    rows.push_back(std::move(r));
  }
  return rows;
}

NodeMatrix matrix_from_json(const Json& j, Eigen::Index rows, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw Error(ErrorCode::ParseError, std::string(what) + " must have one row per node");
  }
  const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  NodeMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto r = j[static_cast<std::size_t>(i)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(r.size()) != cols) {
      throw Error(ErrorCode::ParseError, std::string(what) + " row " + std::to_string(i) + " has wrong width");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = r[static_cast<std::size_t>(c)];
  }
  return m;
}

std::vector<int> sorted_sample(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

NodeMatrix GraphBundle::features() const {
  if (!sparse) return dense_features;
  NodeMatrix m = NodeMatrix::Zero(num_nodes, feature_dim);
  for (int i = 0; i < num_nodes; ++i) {
    const auto& r = sparse_rows[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < r.indices.size(); ++k) m(i, r.indices[k]) = r.values[k];
  }
  return m;
}

void GraphBundle::validate() const {
  if (num_nodes < 0) throw Error(ErrorCode::InvalidArgument, "num_nodes must be >= 0");
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw Error(ErrorCode::OutOfRangeEdge, "edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
  }
  if (feature_dim < 0) throw Error(ErrorCode::DimensionMismatch, "feature_dim must be >= 0");
  if (sparse) {
    if (static_cast<int>(sparse_rows.size()) != num_nodes) {
      throw Error(ErrorCode::DimensionMismatch, "sparse features need one row per node");
    }
    for (std::size_t i = 0; i < sparse_rows.size(); ++i) {
      const auto& r = sparse_rows[i];
      if (r.indices.size() != r.values.size()) {
        throw Error(ErrorCode::DimensionMismatch, "sparse row " + std::to_string(i) + " index/value count");
      }
      for (std::size_t k = 0; k < r.indices.size(); ++k) {
        if (r.indices[k] < 0 || r.indices[k] >= feature_dim || (k > 0 && r.indices[k] <= r.indices[k - 1])) {
          throw Error(ErrorCode::DimensionMismatch,
                      "sparse row " + std::to_string(i) + " indices must be strictly ascending and in range");
        }
      }
    }
  } else if (dense_features.rows() != num_nodes || dense_features.cols() != feature_dim) {
    throw Error(ErrorCode::DimensionMismatch, "dense features must be num_nodes x feature_dim");
  }
  if (!labels.empty()) {
    if (static_cast<int>(labels.size()) != num_nodes) throw Error(ErrorCode::DimensionMismatch, "label count");
    for (int l : labels)
      if (l < kUnlabeled) throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(l));
  }
  if (targets.size() > 0 && targets.rows() != num_nodes) throw Error(ErrorCode::DimensionMismatch, "target rows");
  std::vector<char> owner(static_cast<std::size_t>(num_nodes), 0);
  for (const auto* s : {&splits.train, &splits.val, &splits.test}) {
    for (int v : *s) {
      if (v < 0 || v >= num_nodes) throw Error(ErrorCode::VertexOutOfRange, "split index " + std::to_string(v));
      if (owner[static_cast<std::size_t>(v)]++) {
        throw Error(ErrorCode::MaskOverlap, "vertex " + std::to_string(v) + " appears in more than one split");
      }
    }
  }
}

bool GraphBundle::operator==(const GraphBundle& o) const {
  return format_version == o.format_version && num_nodes == o.num_nodes && edges == o.edges &&
         feature_dim == o.feature_dim && sparse == o.sparse && dense_features == o.dense_features &&
         sparse_rows == o.sparse_rows && labels == o.labels && targets == o.targets && splits == o.splits &&
         metadata == o.metadata;
}

Json bundle_to_json(const GraphBundle& b) {
  b.validate();
  Json j;
  j["format_version"] = b.format_version;
  j["num_nodes"] = b.num_nodes;
  Json edges = Json::array();
  for (auto [u, v] : b.edges) edges.push_back({u, v});
  j["edges"] = edges;
  Json f;
  f["dim"] = b.feature_dim;
  if (b.sparse) {
    f["format"] = "sparse";
    Json idx = Json::array();
    bool binary = true;
    for (const auto& r : b.sparse_rows) {
      idx.push_back(r.indices);
      binary = binary && std::all_of(r.values.begin(), r.values.end(), [](double x) { return x == 1.0; });
    }
    f["indices"] = idx;
    if (binary) {
      f["values"] = nullptr;
    } else {
      Json vals = Json::array();
      for (const auto& r : b.sparse_rows) vals.push_back(r.values);
      f["values"] = vals;
    }
  } else {
    f["format"] = "dense";
    f["rows"] = matrix_to_json(b.dense_features);
  }
  j["features"] = f;
  if (!b.labels.empty()) j["labels"] = b.labels;
  if (b.targets.size() > 0) j["targets"] = matrix_to_json(b.targets);
  if (!b.splits.empty()) j["splits"] = {{"train", b.splits.train}, {"val", b.splits.val}, {"test", b.splits.test}};
  j["metadata"] = b.metadata;
  return j;
}

GraphBundle bundle_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "bundle must be a JSON object");
  if (!j.contains("format_version")) throw Error(ErrorCode::ParseError, "missing format_version");
  const Json& ver = j["format_version"];
  if (!ver.is_string() || ver.get<std::string>() != kBundleFormatVersion) {
    throw Error(ErrorCode::VersionMismatch,
                "bundle format_version " + ver.dump() + ", expected \"" + kBundleFormatVersion + "\"");
  }
  GraphBundle b;
  try {
    b.num_nodes = j.at("num_nodes").get<int>();
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::ParseError, "edge must be a [u, v] pair");
      b.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    const auto& f = j.at("features");
    b.feature_dim = f.at("dim").get<int>();
    const auto fmt = f.at("format").get<std::string>();
    if (fmt == "sparse") {
      b.sparse = true;
      const auto& idx = f.at("indices");
      const auto& vals = f.at("values");
      if (!idx.is_array() || static_cast<int>(idx.size()) != b.num_nodes) {
        throw Error(ErrorCode::ParseError, "sparse indices must have one row per node");
      }
      for (std::size_t i = 0; i < idx.size(); ++i) {
        SparseRow r;
        r.indices = idx[i].get<std::vector<int>>();
        r.values = vals.is_null() ? std::vector<double>(r.indices.size(), 1.0) : vals.at(i).get<std::vector<double>>();
        b.sparse_rows.push_back(std::move(r));
      }
    } else if (fmt == "dense") {
      b.dense_features = matrix_from_json(f.at("rows"), b.num_nodes, "features");
      if (b.num_nodes == 0) b.dense_features.resize(0, b.feature_dim);
    } else {
      throw Error(ErrorCode::ParseError, "features.format must be dense or sparse");
    }
    if (j.contains("labels")) b.labels = j["labels"].get<std::vector<int>>();
    if (j.contains("targets")) b.targets = matrix_from_json(j["targets"], b.num_nodes, "targets");
    if (j.contains("splits")) {
      const auto& s = j["splits"];
      b.splits.train = s.at("train").get<std::vector<int>>();
      b.splits.val = s.at("val").get<std::vector<int>>();
      b.splits.test = s.at("test").get<std::vector<int>>();
    }
    if (j.contains("metadata")) b.metadata = j["metadata"];
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::ParseError, ex.what());
  }
  b.validate();
  return b;
}

GraphBundle parse_bundle(const std::string& text, const std::string& source) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& ex) {
    const std::size_t pos = ex.byte == 0 ? 0 : std::min<std::size_t>(ex.byte - 1, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
    const auto nl = text.rfind('\n', pos == 0 ? 0 : pos - 1);
    const std::size_t col = nl == std::string::npos || pos == 0 ? pos + 1 : pos - nl;
    throw Error(ErrorCode::ParseError,
                source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + ex.what());
  }
  return bundle_from_json(j);
}

void save_bundle(const GraphBundle& bundle, const std::string& path) {
  const Json j = bundle_to_json(bundle);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << j.dump() << '\n';
}

GraphBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_bundle(ss.str(), path);
}

IngestResult load_content_cites(const std::string& content_path, const std::string& cites_path) {
  const auto content = read_lines(content_path);
  IngestResult res;
  GraphBundle& b = res.bundle;
  std::unordered_map<std::string, int> id_of;
  std::vector<std::string> ids, label_names;
  int k = -1;
  for (std::size_t ln = 0; ln < content.size(); ++ln) {
    if (is_blank(content[ln])) continue;
    const auto where = content_path + ":" + std::to_string(ln + 1);
    const auto tok = split_ws(content[ln]);
    if (tok.size() < 2) throw Error(ErrorCode::MalformedRow, where + ": expected 'id features... label'");
    const int width = static_cast<int>(tok.size()) - 2;
    if (k < 0) k = width;
    if (width != k) {
      throw Error(ErrorCode::MalformedRow,
                  where + ": " + std::to_string(width) + " features, expected " + std::to_string(k));
    }
    if (!id_of.emplace(tok.front(), static_cast<int>(ids.size())).second) {
      throw Error(ErrorCode::MalformedRow, where + ": duplicate id '" + tok.front() + "'");
    }
    ids.push_back(tok.front());
    std::vector<double> row(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) row[static_cast<std::size_t>(c)] = parse_number(tok[static_cast<std::size_t>(c) + 1], where);
    b.sparse_rows.push_back(sparse_from_dense(row));
    label_names.push_back(tok.back());
  }
  if (ids.empty()) throw Error(ErrorCode::EmptyFile, "'" + content_path + "' has no rows");

  std::vector<std::string> classes = label_names;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  for (const auto& name : label_names) {
    b.labels.push_back(static_cast<int>(std::lower_bound(classes.begin(), classes.end(), name) - classes.begin()));
  }

  b.num_nodes = static_cast<int>(ids.size());
  b.feature_dim = k;
  b.sparse = true;

  const auto cites = read_lines(cites_path);
  std::vector<std::pair<int, int>> directed;
  for (std::size_t ln = 0; ln < cites.size(); ++ln) {
    if (is_blank(cites[ln])) continue;
    const auto tok = split_ws(cites[ln]);
    if (tok.size() != 2) {
      throw Error(ErrorCode::MalformedRow, cites_path + ":" + std::to_string(ln + 1) + ": expected 'cited citing'");
    }
    const auto a = id_of.find(tok[0]);
    const auto c = id_of.find(tok[1]);
    if (a == id_of.end() || c == id_of.end()) {
      ++res.unknown_edges_dropped;
      continue;
    }
    directed.emplace_back(a->second, c->second);
  }
  if (directed.empty() && res.unknown_edges_dropped == 0) {
    res.warnings.push_back("EmptyCites: '" + cites_path + "' lists no citations");
  }
  finish_edges(res, directed);
  b.metadata = {{"name", stem(content_path)}, {"class_names", classes}, {"node_ids", ids}, {"source", "content-cites"}};
  b.validate();
  return res;
}

IngestResult load_webkb(const std::string& features_labels_path, const std::string& edges_path) {
  const auto rows = read_lines(features_labels_path);
  IngestResult res;
  GraphBundle& b = res.bundle;
  std::unordered_map<std::string, int> id_of;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> feats;
  std::vector<long> raw_labels;
  int k = -1;
  for (std::size_t ln = 0; ln < rows.size(); ++ln) {
    if (is_blank(rows[ln])) continue;
    const auto where = features_labels_path + ":" + std::to_string(ln + 1);
    auto tok = split_on(rows[ln], '\t');
    if (tok.size() == 3 && tok[0] == "node_id") continue;
    if (tok.size() != 3) throw Error(ErrorCode::MalformedRow, where + ": expected 'id<TAB>features<TAB>label'");
    const auto fs = split_on(tok[1], ',');
    const int width = static_cast<int>(fs.size());
    if (k < 0) k = width;
    if (width != k) throw Error(ErrorCode::MalformedRow, where + ": feature width " + std::to_string(width));
    std::vector<double> row;
    row.reserve(fs.size());
    for (const auto& f : fs) row.push_back(parse_number(f, where));
    if (!id_of.emplace(tok[0], static_cast<int>(ids.size())).second) {
      throw Error(ErrorCode::MalformedRow, where + ": duplicate id '" + tok[0] + "'");
    }
    ids.push_back(tok[0]);
    feats.push_back(std::move(row));
    raw_labels.push_back(static_cast<long>(parse_number(tok[2], where)));
  }
  if (ids.empty()) throw Error(ErrorCode::EmptyFile, "'" + features_labels_path + "' has no rows");

  std::vector<long> classes = raw_labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::vector<std::string> class_names;
  for (long c : classes) class_names.push_back(std::to_string(c));
  for (long l : raw_labels) {
    b.labels.push_back(static_cast<int>(std::lower_bound(classes.begin(), classes.end(), l) - classes.begin()));
  }
  b.num_nodes = static_cast<int>(ids.size());
  b.feature_dim = k;
  b.sparse = true;
  for (const auto& r : feats) b.sparse_rows.push_back(sparse_from_dense(r));

  const auto erows = read_lines(edges_path);
  std::vector<std::pair<int, int>> directed;
  for (std::size_t ln = 0; ln < erows.size(); ++ln) {
    if (is_blank(erows[ln])) continue;
    const auto tok = split_ws(erows[ln]);
    if (tok.size() == 2 && tok[0] == "node_id") continue;
    if (tok.size() != 2) {
      throw Error(ErrorCode::MalformedRow, edges_path + ":" + std::to_string(ln + 1) + ": expected 'u<TAB>v'");
    }
    const auto a = id_of.find(tok[0]);
    const auto c = id_of.find(tok[1]);
    if (a == id_of.end() || c == id_of.end()) {
      ++res.unknown_edges_dropped;
      continue;
    }
    directed.emplace_back(a->second, c->second);
  }
  finish_edges(res, directed);
  b.metadata = {{"name", stem(features_labels_path)}, {"class_names", class_names}, {"node_ids", ids},
                {"source", "webkb"}};
  b.validate();
  return res;
}

Splits make_splits(int n, std::array<double, 3> fr, std::uint64_t seed) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "n must be >= 0");
  for (double f : fr)
    if (!(f >= 0.0)) throw Error(ErrorCode::InvalidArgument, "split fractions must be non-negative");
  const double total = fr[0] + fr[1] + fr[2];
  if (total > 1.0 + 1e-9) throw Error(ErrorCode::InvalidArgument, "split fractions sum to more than 1");

  auto count = [n](double f) { return static_cast<int>(std::llround(f * n)); };
  int tr = std::min(count(fr[0]), n);
  int va = std::min(count(fr[1]), n - tr);
  int te = std::abs(total - 1.0) <= 1e-9 ? n - tr - va : std::min(count(fr[2]), n - tr - va);

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  Splits s;
  s.train = sorted_sample({perm.begin(), perm.begin() + tr});
  s.val = sorted_sample({perm.begin() + tr, perm.begin() + tr + va});
  s.test = sorted_sample({perm.begin() + tr + va, perm.begin() + tr + va + te});
  return s;
}

GraphBundle synth_sbm(int n, int num_classes, double p_in, double p_out, double feature_noise, std::uint64_t seed) {
  if (n < 1 || num_classes < 1) throw Error(ErrorCode::InvalidArgument, "n and num_classes must be >= 1");
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "edge probabilities must lie in [0, 1]");
  }
  if (!(feature_noise >= 0.0)) throw Error(ErrorCode::InvalidArgument, "feature noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GraphBundle b;
  b.num_nodes = n;
  for (int i = 0; i < n; ++i) b.labels.push_back(i % num_classes);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = b.labels[static_cast<std::size_t>(i)] == b.labels[static_cast<std::size_t>(j)] ? p_in : p_out;
      if (u(rng) < p) b.edges.emplace_back(i, j);
    }
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  b.feature_dim = num_classes;
  b.dense_features = NodeMatrix::Zero(n, num_classes);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < num_classes; ++c) {
      b.dense_features(i, c) = (c == b.labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0) + feature_noise * noise(rng);
    }
  }
  b.splits = make_splits(n, {0.6, 0.2, 0.2}, seed ^ 0x5b5b5b5bULL);
  std::vector<std::string> names;
  for (int c = 0; c < num_classes; ++c) names.push_back("c" + std::to_string(c));
  b.metadata = {{"name", "sbm"},
                {"class_names", names},
                {"split_source", "seeded:" + std::to_string(seed ^ 0x5b5b5b5bULL)},
                {"generator", {{"p_in", p_in}, {"p_out", p_out}, {"feature_noise", feature_noise}, {"seed", seed}}}};
  return b;
}

int distance_task_head(int chain, int k) { return chain * (k + 1); }
int distance_task_tail(int chain, int k) { return chain * (k + 1) + k; }

GraphBundle synth_distance_task(int k, int num_chains, std::uint64_t seed) {
  if (k < 1 || num_chains < 1) throw Error(ErrorCode::InvalidArgument, "k and num_chains must be >= 1");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  GraphBundle b;
  b.num_nodes = num_chains * (k + 1);
  b.feature_dim = 1;
  b.dense_features = NodeMatrix::Zero(b.num_nodes, 1);
  b.labels.assign(static_cast<std::size_t>(b.num_nodes), kUnlabeled);
  std::vector<int> heads, tails;
  for (int c = 0; c < num_chains; ++c) {
    const int head = distance_task_head(c, k);
    for (int i = 0; i <= k; ++i) {
      b.dense_features(head + i, 0) = coin(rng) ? 1.0 : -1.0;
      if (i < k) b.edges.emplace_back(head + i, head + i + 1);
    }
    const int tail = distance_task_tail(c, k);
    b.labels[static_cast<std::size_t>(tail)] = b.dense_features(head, 0) > 0.0 ? 1 : 0;
    heads.push_back(head);
    tails.push_back(tail);
  }
  const auto chain_split = make_splits(num_chains, {0.6, 0.2, 0.2}, seed ^ 0xc4a1c4a1ULL);
  auto to_tails = [&](const std::vector<int>& cs) {
    std::vector<int> out;
    for (int c : cs) out.push_back(tails[static_cast<std::size_t>(c)]);
    return out;
  };
  b.splits = {to_tails(chain_split.train), to_tails(chain_split.val), to_tails(chain_split.test)};
  b.metadata = {{"name", "distance_task"},
                {"class_names", {"minus", "plus"}},
                {"k", k},
                {"heads", heads},
                {"tails", tails},
                {"split_source", "seeded-chains:" + std::to_string(seed ^ 0xc4a1c4a1ULL)}};
  return b;
}

GraphBuild bundle_to_graph(const GraphBundle& bundle, const BuildOptions& options) {
  bundle.validate();
  GraphInput in;
  in.num_nodes = bundle.num_nodes;
  in.edges = bundle.edges;
  in.features = bundle.features();
  in.labels = bundle.labels;
  in.targets = bundle.targets;
  auto mask = [&](const std::vector<int>& idx) {
    std::vector<bool> m(static_cast<std::size_t>(bundle.num_nodes), false);
    for (int v : idx) m[static_cast<std::size_t>(v)] = true;
    return m;
  };
  in.masks = {mask(bundle.splits.train), mask(bundle.splits.val), mask(bundle.splits.test)};
  return build_graph(std::move(in), options);
}

std::string split_provenance(const GraphBundle& bundle) {
  if (bundle.metadata.contains("split_source") && bundle.metadata["split_source"].is_string()) {
    return bundle.metadata["split_source"].get<std::string>();
  }
  return bundle.splits.empty() ? "none" : "bundle";
}

GraphBundle with_seeded_splits(GraphBundle bundle, std::uint64_t seed) {
  std::vector<int> pool;
  for (int v = 0; v < bundle.num_nodes; ++v) {
    if (bundle.labels.empty() || bundle.labels[static_cast<std::size_t>(v)] != kUnlabeled) pool.push_back(v);
  }
  const auto s = make_splits(static_cast<int>(pool.size()), {0.6, 0.2, 0.2}, seed);
  auto map = [&](const std::vector<int>& idx) {
    std::vector<int> out;
    for (int i : idx) out.push_back(pool[static_cast<std::size_t>(i)]);
    return out;
  };
  bundle.splits = {map(s.train), map(s.val), map(s.test)};
  bundle.metadata["split_source"] = "seeded:" + std::to_string(seed);
  return bundle;
}

}  // namespace glaudio
