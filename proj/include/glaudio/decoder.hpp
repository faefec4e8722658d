#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glaudio/types.hpp"

namespace glaudio {

enum class Architecture { rnn, lstm, cornn };
enum class Activation { identity, relu, leaky_relu, tanh, gelu };
enum class EmbeddingPlacement { pre_propagation, post_propagation };

const char* to_string(Architecture a) noexcept;
const char* to_string(Activation a) noexcept;
const char* to_string(EmbeddingPlacement p) noexcept;
Architecture architecture_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);
EmbeddingPlacement placement_from_string(const std::string& s);

double activate(Activation a, double x) noexcept;
double activate_grad(Activation a, double x) noexcept;  // derivative at pre-activation x

/// One recurrent layer. Shapes by architecture (q = hidden, in = layer input):
///   rnn:   recurrent q x q (W), input q x in (U), bias q
///   lstm:  recurrent 4q x q, input 4q x in, bias 4q; gate rows [i; f; g; o]
///   cornn: recurrent q x q (W), recurrent_z q x q (W~), input q x in, bias q
struct RecurrentLayer {
  Eigen::MatrixXd recurrent;
  Eigen::MatrixXd recurrent_z;  // cornn only
  Eigen::MatrixXd input;
  Eigen::VectorXd bias;
};

/// Trainable tensors in checkpoint order: embedding weight/bias, layers in
/// order (recurrent, recurrent_z, input, bias), head weight/bias. Also the
/// shape of a gradient set.
struct ParameterTensors {
  Eigen::MatrixXd embedding_weight;  // q x d0
  Eigen::VectorXd embedding_bias;    // q
  std::vector<RecurrentLayer> layers;
  Eigen::MatrixXd head_weight;  // d1 x q
  Eigen::VectorXd head_bias;    // d1

  ParameterTensors zeros_like() const;
  std::size_t size() const;
  // Non-empty tensors as mutable flat views, in checkpoint order.
  std::vector<std::span<double>> views();
  std::vector<std::span<const double>> views() const;
  std::vector<std::string> names() const;
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);
  bool same_shape(const ParameterTensors& other) const;
};

using GradientSet = ParameterTensors;

struct CornnScalars {
  double gamma = 1.0;
  double epsilon = 1.0;
  double dt = 1.0;
};

struct DecoderDims {
  int input_dim = 1;   // d0
  int hidden_dim = 8;  // q
  int output_dim = 1;  // d1
  int num_layers = 1;  // L
};

struct DecoderOptions {
  EmbeddingPlacement placement = EmbeddingPlacement::pre_propagation;
  Activation embedding_activation = Activation::identity;
  // Sequence carries [X^i_v, V^i_v] instead of X^i_v alone.
  bool include_velocity = false;
  CornnScalars cornn;
};

struct DecoderParams {
  Architecture architecture = Architecture::rnn;
  Activation activation = Activation::relu;
  Activation embedding_activation = Activation::identity;
  EmbeddingPlacement placement = EmbeddingPlacement::pre_propagation;
  bool include_velocity = false;
  CornnScalars cornn;
  DecoderDims dims;
  std::uint64_t seed = 0;
  ParameterTensors tensors;

  // Width of the per-step sequence the decoder consumes directly: d0 when
  // the embedding is applied per step, q when it ran before propagation
  // (doubled when velocities are included).
  int sequence_width() const;
  // Input width of the first recurrent layer.
  int first_layer_width() const;
  // Input width of the embedding matrix.
  int embedding_input_width() const;
  std::size_t parameter_count() const { return tensors.size(); }
  void validate() const;
};

// Closed-form count for given dims (no velocity channels), independent of
// any instance.
std::size_t parameter_count(Architecture arch, const DecoderDims& dims);

// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero biases,
// LSTM forget-gate bias 1.
DecoderParams init_params(Architecture arch, const DecoderDims& dims, Activation activation, std::uint64_t seed,
                          const DecoderOptions& options = {});

// Per-step batch: steps[t] is width x B, column b is node b's input at t+1.
using SequenceBatch = std::vector<Eigen::MatrixXd>;

SequenceBatch to_batch(const NodeMatrix& sequence);

struct ForwardOptions {
  double dropout_rate = 0.0;
  std::mt19937_64* rng = nullptr;  // null => dropout off (inference mode)
};

struct LayerTape {
  std::vector<Eigen::MatrixXd> inputs;     // t = 1..N
  std::vector<Eigen::MatrixXd> pre;        // pre-activations (lstm: 4q gate pre-acts)
  std::vector<Eigen::MatrixXd> states;     // t = 0..N (hidden s / h / y)
  std::vector<Eigen::MatrixXd> aux;        // lstm: cells c_t, cornn: z_t; t = 0..N
};

struct Tape {
  Architecture architecture = Architecture::rnn;
  DecoderDims dims;
  int steps = 0;
  Eigen::Index batch = 0;
  bool embedded_per_step = false;
  std::vector<Eigen::MatrixXd> raw_inputs;     // only when embedded_per_step
  std::vector<Eigen::MatrixXd> embedding_pre;  // only when embedded_per_step
  std::vector<Eigen::MatrixXd> input_masks;    // dropout scale factors (empty => none)
  Eigen::MatrixXd head_mask;
  std::vector<LayerTape> layers;
  Eigen::MatrixXd head_input;  // final state after dropout
  Eigen::MatrixXd outputs;     // d1 x B
};

struct ForwardResult {
  Eigen::MatrixXd outputs;  // d1 x B, y_N per node
  Tape tape;
};

ForwardResult forward(const DecoderParams& params, const SequenceBatch& sequence, const ForwardOptions& options = {});
// Single node: sequence is N x width. Returns y_N.
Eigen::VectorXd forward_single(const DecoderParams& params, const NodeMatrix& sequence, Tape* tape = nullptr,
                               const ForwardOptions& options = {});

struct BackwardResult {
  GradientSet grads;
  SequenceBatch input_grads;  // d loss / d sequence, same layout as the input
};

// Exact BPTT gradients of sum_b <output_grad_b, y_N,b>.
BackwardResult backward(const DecoderParams& params, const Tape& tape, const Eigen::MatrixXd& output_grad);

struct CornnState {
  Eigen::VectorXd y;
  Eigen::VectorXd z;
};

// z' = z + dt (sigma(W y + W~ z + V u + b) - gamma y - eps z);  y' = y + dt z'
CornnState cornn_step(const CornnState& state, const Eigen::VectorXd& input, const RecurrentLayer& layer,
                      Activation activation, const CornnScalars& scalars);

// Node-wise embedding applied to a node matrix (n x d0 -> n x q).
struct NodeEmbedding {
  NodeMatrix pre;     // n x q, W x + b
  NodeMatrix output;  // n x q, activation(pre)
};
NodeEmbedding embed_nodes(const DecoderParams& params, const NodeMatrix& features);
// Accumulates embedding gradients into grads and returns d loss / d features.
NodeMatrix embed_nodes_backward(const DecoderParams& params, const NodeMatrix& features, const NodeEmbedding& emb,
                                const NodeMatrix& output_grad, GradientSet& grads);

}  // namespace glaudio
