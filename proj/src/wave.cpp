#include "glaudio/wave.hpp"

#include <cmath>
#include <sstream>

#include "glaudio/error.hpp"

namespace glaudio {

WaveConfig WaveConfig::from_stop_time(double stop_time, int num_steps) {
  if (num_steps < 1) throw Error(ErrorCode::InvalidConfig, "number of time steps must be >= 1");
  WaveConfig c;
  c.num_steps = num_steps;
  c.step_size = stop_time / num_steps;
  c.validate();
  return c;
}

void WaveConfig::validate() const {
  if (num_steps < 1) throw Error(ErrorCode::InvalidConfig, "number of time steps must be >= 1");
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw Error(ErrorCode::InvalidConfig, "step size must be positive and finite");
  }
}

Stability check_stability(const LaplacianOperator& op, const WaveConfig& config) {
  Stability s;
  s.product = config.step_size * std::sqrt(std::max(op.max_eigenvalue_bound, 0.0));
  s.stable = s.product < 2.0;
  return s;
}

namespace {

std::string stability_warning(const Stability& s) {
  std::ostringstream msg;
  msg << "StabilityWarning: h*sqrt(max_eigenvalue_bound) = " << s.product << " >= 2";
  return msg.str();
}

}  // namespace

WaveSignal propagate(const LaplacianOperator& op, const NodeMatrix& x0, const WaveConfig& config) {
  config.validate();
  if (x0.rows() != op.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "initial features have " + std::to_string(x0.rows()) +
                                                  " rows, operator has dimension " +
                                                  std::to_string(op.dimension()));
  }
  WaveSignal sig;
  sig.config = config;
  sig.stability = check_stability(op, config);
  if (!sig.stability.stable) sig.warnings.push_back(stability_warning(sig.stability));

  const int N = config.num_steps;
  const double h = config.step_size;
  sig.positions.reserve(static_cast<std::size_t>(N) + 1);
  sig.velocities.reserve(static_cast<std::size_t>(N) + 1);
  sig.positions.push_back(x0);
  sig.velocities.push_back(NodeMatrix::Zero(x0.rows(), x0.cols()));

  NodeMatrix lx;
  for (int i = 0; i < N; ++i) {
    const NodeMatrix& x = sig.positions.back();
    op.matrix.apply_into(x, lx);
    NodeMatrix v_next = sig.velocities.back() - h * lx;
    NodeMatrix x_next = x + h * v_next;
    sig.velocities.push_back(std::move(v_next));
    sig.positions.push_back(std::move(x_next));
  }
  return sig;
}

Eigen::VectorXd sample_step_function(const WaveSignal& signal, int vertex, double t) {
  const auto& cfg = signal.config;
  const double T = cfg.stop_time();
  if (!(t > 0.0) || t > T * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "t = " << t << " outside (0, " << T << "]";
    throw Error(ErrorCode::TimeOutOfRange, msg.str());
  }
  if (vertex < 0 || vertex >= signal.num_nodes()) {
    throw Error(ErrorCode::VertexOutOfRange, "vertex " + std::to_string(vertex));
  }
  // Cell index i with t in ((i-1)h, ih]; the slack absorbs t = ih round-off.
  long i = static_cast<long>(std::ceil(t / cfg.step_size - 1e-9));
  i = std::clamp(i, 1L, static_cast<long>(cfg.num_steps));
  return signal.positions[static_cast<std::size_t>(i)].row(vertex).transpose();
}

NodeMatrix node_sequence(const WaveSignal& signal, int vertex, bool include_velocity) {
  if (vertex < 0 || vertex >= signal.num_nodes()) {
    throw Error(ErrorCode::VertexOutOfRange, "vertex " + std::to_string(vertex));
  }
  const int N = signal.config.num_steps;
  const int d = signal.feature_dim();
  NodeMatrix seq(N, include_velocity ? 2 * d : d);
  for (int i = 1; i <= N; ++i) {
    seq.row(i - 1).head(d) = signal.positions[i].row(vertex);
    if (include_velocity) seq.row(i - 1).tail(d) = signal.velocities[i].row(vertex);
  }
  return seq;
}

VertexSequences propagate_streaming(const LaplacianOperator& op, const NodeMatrix& x0, const WaveConfig& config,
                                    std::span<const int> vertices, bool include_velocity) {
  config.validate();
  if (x0.rows() != op.dimension()) throw Error(ErrorCode::DimensionMismatch, "initial features/operator");
  const int n = op.dimension();
  for (int v : vertices) {
    if (v < 0 || v >= n) throw Error(ErrorCode::VertexOutOfRange, "vertex " + std::to_string(v));
  }
  VertexSequences out;
  out.vertices.assign(vertices.begin(), vertices.end());
  out.config = config;
  out.stability = check_stability(op, config);
  out.include_velocity = include_velocity;

  const int N = config.num_steps;
  const double h = config.step_size;
  const auto d = x0.cols();
  const auto B = static_cast<Eigen::Index>(vertices.size());
  out.steps.reserve(static_cast<std::size_t>(N));

  NodeMatrix x = x0;
  NodeMatrix v = NodeMatrix::Zero(x0.rows(), d);
  NodeMatrix lx;
  for (int i = 0; i < N; ++i) {
    op.matrix.apply_into(x, lx);
    v -= h * lx;
    x += h * v;
    Eigen::MatrixXd step(include_velocity ? 2 * d : d, B);
    for (Eigen::Index b = 0; b < B; ++b) {
      step.col(b).head(d) = x.row(vertices[b]).transpose();
      if (include_velocity) step.col(b).tail(d) = v.row(vertices[b]).transpose();
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

NodeMatrix propagate_adjoint(const LaplacianOperator& op, const WaveConfig& config, int feature_dim,
                             std::span<const int> vertices, const std::vector<Eigen::MatrixXd>& step_grads,
                             bool include_velocity) {
  config.validate();
  const int n = op.dimension();
  const int N = config.num_steps;
  const double h = config.step_size;
  const int width = include_velocity ? 2 * feature_dim : feature_dim;
  const auto B = static_cast<Eigen::Index>(vertices.size());
  if (static_cast<int>(step_grads.size()) != N) throw Error(ErrorCode::DimensionMismatch, "step gradient count");
  for (const auto& g : step_grads) {
    if (g.rows() != width || g.cols() != B) throw Error(ErrorCode::DimensionMismatch, "step gradient shape");
  }

  NodeMatrix adj_x = NodeMatrix::Zero(n, feature_dim);
  NodeMatrix adj_v = NodeMatrix::Zero(n, feature_dim);
  auto scatter = [&](int i) {
    const auto& g = step_grads[static_cast<std::size_t>(i - 1)];
    for (Eigen::Index b = 0; b < B; ++b) {
      adj_x.row(vertices[b]) += g.col(b).head(feature_dim).transpose();
      if (include_velocity) adj_v.row(vertices[b]) += g.col(b).tail(feature_dim).transpose();
    }
  };

  scatter(N);
  NodeMatrix l_adj;
  for (int i = N - 1; i >= 0; --i) {
    // X^{i+1} = X^i + h V^{i+1}
    adj_v += h * adj_x;
    // V^{i+1} = V^i - h L X^i   (L symmetric)
    op.matrix.apply_into(adj_v, l_adj);
    adj_x -= h * l_adj;
    if (i >= 1) scatter(i);
  }
  return adj_x;
}

}  // namespace glaudio
