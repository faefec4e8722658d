#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "glaudio/graph.hpp"

namespace glaudio::testing {

inline Graph make_graph(int n, std::vector<std::pair<int, int>> edges, NodeMatrix features = {}) {
  GraphInput in;
  in.num_nodes = n;
  in.edges = std::move(edges);
  in.features = features.size() > 0 ? std::move(features) : NodeMatrix::Zero(n, 1);
  return build_graph(std::move(in)).graph;
}

inline std::vector<std::pair<int, int>> path_edges(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

inline std::vector<std::pair<int, int>> complete_edges(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return e;
}

// Star with centre 0 and `leaves` leaves.
inline std::vector<std::pair<int, int>> star_edges(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return e;
}

// Random spanning tree plus extra edges with probability p.
inline std::vector<std::pair<int, int>> random_connected_edges(int n, double p, std::mt19937_64& rng) {
  std::vector<std::pair<int, int>> e;
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    e.emplace_back(pick(rng), v);
  }
  std::bernoulli_distribution extra(p);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (extra(rng)) e.emplace_back(u, v);
    }
  }
  return e;  // duplicates are merged by build_graph
}

inline NodeMatrix random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  NodeMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Largest elementwise relative error between an analytic gradient and central
// differences of f over the entries of `theta`.
inline double max_fd_error(std::vector<double>& theta, const std::vector<double>& analytic,
                           const std::function<double()>& f, double delta = 1e-5, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + delta;
    const double up = f();
    theta[i] = keep - delta;
    const double down = f();
    theta[i] = keep;
    worst = std::max(worst, relative_error((up - down) / (2.0 * delta), analytic[i], floor));
  }
  return worst;
}

}  // namespace glaudio::testing
