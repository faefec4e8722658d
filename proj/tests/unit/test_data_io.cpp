#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>

#include "glaudio/data_io.hpp"
#include "glaudio/error.hpp"

using namespace glaudio;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

fs::path fixture(const std::string& name) { return fs::path(GLAUDIO_FIXTURE_DIR) / name; }

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("glaudio_io_" + std::to_string(std::random_device{}()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

double homophily(const GraphBundle& b) {
  int same = 0;
  for (const auto& [u, v] : b.edges) same += b.labels[u] == b.labels[v];
  return static_cast<double>(same) / static_cast<double>(b.edges.size());
}

}  // namespace

TEST_CASE("load_content_cites: toy fixture") {
  const auto r = load_content_cites(fixture("toy.content").string(), fixture("toy.cites").string());
  CHECK(r.bundle.num_nodes == 3);
  CHECK(r.bundle.edges.size() == 2);
  CHECK(r.unknown_edges_dropped == 1);
  CHECK(r.duplicate_edges_merged == 1);
  CHECK(r.bundle.feature_dim == 4);
  CHECK(r.bundle.labels == std::vector<int>{1, 0, 1});  // classes sorted: Neural, Theory
  CHECK(r.bundle.metadata["class_names"] == Json::array({"Neural", "Theory"}));
  CHECK(r.bundle.features()(0, 2) == 1.0);
  CHECK_NOTHROW(bundle_to_graph(r.bundle));
}

TEST_CASE("load_content_cites: row order of cites is irrelevant") {
  TempDir d;
  const auto content = d.write("c.content", "a 1 0 x\nb 0 1 y\nc 1 1 x\nd 0 0 y\n");
  const auto c1 = d.write("c1.cites", "a b\nc d\nb c\n");
  const auto c2 = d.write("c2.cites", "c b\nd c\nb a\n");
  CHECK(load_content_cites(content.string(), c1.string()).bundle ==
        load_content_cites(content.string(), c2.string()).bundle);
}

TEST_CASE("load_content_cites: errors") {
  TempDir d;
  const auto empty = d.write("e.content", "\n");
  const auto cites = d.write("x.cites", "a b\n");
  CHECK(code_of([&] { load_content_cites(empty.string(), cites.string()); }) == ErrorCode::EmptyFile);
  const auto bad = d.write("b.content", "a 1 0 x\nb 0 y\n");
  CHECK(code_of([&] { load_content_cites(bad.string(), cites.string()); }) == ErrorCode::MalformedRow);
  const auto bad_cites = d.write("b.cites", "a b c\n");
  const auto ok = d.write("ok.content", "a 1 x\nb 0 y\n");
  CHECK(code_of([&] { load_content_cites(ok.string(), bad_cites.string()); }) == ErrorCode::MalformedRow);
  CHECK(code_of([&] { load_content_cites((d.path / "missing").string(), cites.string()); }) == ErrorCode::IoError);
}

TEST_CASE("load_webkb: toy fixture") {
  const auto r = load_webkb(fixture("toy_webkb_features.txt").string(), fixture("toy_webkb_edges.txt").string());
  CHECK(r.bundle.num_nodes == 4);
  CHECK(r.bundle.edges.size() == 4);
  CHECK(r.bundle.labels == std::vector<int>{0, 1, 2, 0});
  CHECK(r.bundle.feature_dim == 3);
}

TEST_CASE("bundle round-trip on every fixture") {
  TempDir d;
  for (const auto& entry : fs::directory_iterator(GLAUDIO_FIXTURE_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const GraphBundle b = load_bundle(entry.path().string());
    save_bundle(b, (d.path / "rt.json").string());
    CHECK(load_bundle((d.path / "rt.json").string()) == b);
  }
  const auto cora_like = load_content_cites(fixture("toy.content").string(), fixture("toy.cites").string()).bundle;
  save_bundle(cora_like, (d.path / "toy.json").string());
  CHECK(load_bundle((d.path / "toy.json").string()) == cora_like);
  const Json j = bundle_to_json(cora_like);
  CHECK(j["features"]["format"] == "sparse");
  CHECK(j["features"]["values"].is_null());
  for (const auto& b : {synth_sbm(30, 3, 0.3, 0.05, 0.2, 1), synth_distance_task(3, 5, 2)}) {
    save_bundle(b, (d.path / "s.json").string());
    CHECK(load_bundle((d.path / "s.json").string()) == b);
  }
}

TEST_CASE("load_bundle: parse and version errors") {
  TempDir d;
  std::ifstream in(fixture("p3.json"));
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto trunc = d.write("t.json", text.substr(0, text.size() / 2));
  CHECK(code_of([&] { load_bundle(trunc.string()); }) == ErrorCode::ParseError);
  try {
    load_bundle(trunc.string());
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("t.json:") != std::string::npos);
  }
  Json j = Json::parse(text);
  j["format_version"] = "2";
  const auto ver = d.write("v.json", j.dump());
  CHECK(code_of([&] { load_bundle(ver.string()); }) == ErrorCode::VersionMismatch);
  j["format_version"] = "1";
  j["edges"] = Json::array({Json::array({0, 5})});
  CHECK(code_of([&] { bundle_from_json(j); }) != ErrorCode::IoError);
}

TEST_CASE("make_splits") {
  const auto s = make_splits(10, {0.6, 0.2, 0.2}, 3);
  CHECK(s.train.size() == 6);
  CHECK(s.val.size() == 2);
  CHECK(s.test.size() == 2);
  std::set<int> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 10);
  CHECK(make_splits(10, {0.6, 0.2, 0.2}, 3) == s);
  CHECK(make_splits(10, {0.6, 0.2, 0.2}, 4) != s);
  CHECK(code_of([] { make_splits(10, {0.6, 0.3, 0.2}, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("synth_sbm") {
  const auto sep = synth_sbm(80, 2, 0.2, 0.0, 0.1, 1);
  for (const auto& [u, v] : sep.edges) CHECK(sep.labels[u] == sep.labels[v]);
  CHECK(synth_sbm(80, 2, 0.2, 0.0, 0.1, 1) == sep);

  // p_in = p_out: each edge is same-class with probability ~ 1/C.
  const int C = 3;
  const auto mix = synth_sbm(300, C, 0.05, 0.05, 0.1, 9);
  const double m = static_cast<double>(mix.edges.size());
  // Exact same-class pair fraction for 100 vertices per class.
  const double p = 3.0 * (100.0 * 99.0 / 2.0) / (300.0 * 299.0 / 2.0);
  CHECK(std::abs(homophily(mix) - p) <= 3.0 * std::sqrt(p * (1 - p) / m));
  CHECK(std::abs(p - 1.0 / C) < 0.01);
  CHECK(homophily(synth_sbm(100, 2, 0.02, 0.1, 0.1, 2)) < 0.5);
  CHECK_NOTHROW(bundle_to_graph(mix));
}

TEST_CASE("synth_distance_task") {
  const int k = 8, chains = 200;
  const auto b = synth_distance_task(k, chains, 5);
  CHECK(b == synth_distance_task(k, chains, 5));
  CHECK(b.num_nodes == chains * (k + 1));
  int ones = 0, labeled = 0;
  for (int c = 0; c < chains; ++c) {
    const int head = distance_task_head(c, k), tail = distance_task_tail(c, k);
    CHECK(tail - head == k);
    const int expect = b.features()(head, 0) > 0 ? 1 : 0;
    CHECK(b.labels[tail] == expect);
    ones += b.labels[tail];
  }
  for (int l : b.labels) labeled += l != -1;
  CHECK(labeled == chains);
  const double majority = std::max(ones, chains - ones) / static_cast<double>(chains);
  CHECK(std::abs(majority - 0.5) <= 3.0 * std::sqrt(0.25 / chains) + 1.0 / chains);
  const auto g = bundle_to_graph(b).graph;
  CHECK(g.edges().size() == static_cast<std::size_t>(chains * k));

  // k = 1: head and tail are adjacent.
  const auto one = synth_distance_task(1, 10, 1);
  for (int c = 0; c < 10; ++c) CHECK(distance_task_tail(c, 1) - distance_task_head(c, 1) == 1);
  CHECK(bundle_to_graph(one).graph.edges().size() == 10);
}

TEST_CASE("seeded splits record their provenance") {
  auto b = load_webkb(fixture("toy_webkb_features.txt").string(), fixture("toy_webkb_edges.txt").string()).bundle;
  CHECK(split_provenance(b) == "none");
  const auto s = with_seeded_splits(b, 7);
  CHECK(split_provenance(s) == "seeded:7");
  CHECK(s.splits.train.size() + s.splits.val.size() + s.splits.test.size() == 4);
  CHECK(split_provenance(load_bundle(fixture("p3.json").string())) == "bundle");
}
