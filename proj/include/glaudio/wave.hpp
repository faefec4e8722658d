#pragma once

#include <span>
#include <string>
#include <vector>

#include "glaudio/graph.hpp"
#include "glaudio/types.hpp"

namespace glaudio {

struct WaveConfig {
  int num_steps = 1;       // N
  double step_size = 0.1;  // h

  double stop_time() const { return num_steps * step_size; }  // T = N h

  static WaveConfig from_stop_time(double stop_time, int num_steps);
  void validate() const;
};

struct Stability {
  double product = 0.0;  // h * sqrt(max_eigenvalue_bound)
  bool stable = true;    // product < 2
};

Stability check_stability(const LaplacianOperator& op, const WaveConfig& config);

/// Full trajectory X^0..X^N, V^0..V^N of the discrete wave equation.
struct WaveSignal {
  std::vector<NodeMatrix> positions;
  std::vector<NodeMatrix> velocities;
  WaveConfig config;
  Stability stability;
  std::vector<std::string> warnings;

  int num_nodes() const { return positions.empty() ? 0 : static_cast<int>(positions.front().rows()); }
  int feature_dim() const { return positions.empty() ? 0 : static_cast<int>(positions.front().cols()); }
};

// Symplectic-Euler scheme: V^{i+1} = V^i - h L X^i, then X^{i+1} = X^i + h V^{i+1},
// with X^0 = x0 and V^0 = 0. Columns are independent.
WaveSignal propagate(const LaplacianOperator& op, const NodeMatrix& x0, const WaveConfig& config);

// Step function of the scheme: X^1 on (0, h], X^i on ((i-1)h, ih].
Eigen::VectorXd sample_step_function(const WaveSignal& signal, int vertex, double t);

// Decoder input for one vertex: rows X^1_v..X^N_v, optionally [X^i_v, V^i_v].
NodeMatrix node_sequence(const WaveSignal& signal, int vertex, bool include_velocity = false);

/// Streaming encoder output: only the requested vertices, steps 1..N.
/// steps[i-1] is (d or 2d) x |vertices|, one column per vertex, the layout
/// the batched decoder consumes.
struct VertexSequences {
  std::vector<int> vertices;
  std::vector<Eigen::MatrixXd> steps;
  WaveConfig config;
  Stability stability;
  bool include_velocity = false;
};

VertexSequences propagate_streaming(const LaplacianOperator& op, const NodeMatrix& x0, const WaveConfig& config,
                                    std::span<const int> vertices, bool include_velocity = false);

// Adjoint of propagate_streaming: given d(loss)/d(steps) for the same
// vertices, returns d(loss)/d(x0). The encoder is linear, so this is the
// exact transposed recurrence.
NodeMatrix propagate_adjoint(const LaplacianOperator& op, const WaveConfig& config, int feature_dim,
                             std::span<const int> vertices, const std::vector<Eigen::MatrixXd>& step_grads,
                             bool include_velocity = false);

}  // namespace glaudio
