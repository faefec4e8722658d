#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glaudio/config.hpp"
#include "glaudio/decoder.hpp"
#include "glaudio/graph.hpp"
#include "glaudio/wave.hpp"

namespace glaudio {

/// A trained (or freshly initialized) GLAudio model: decoder weights plus the
/// encoder settings they were trained with.
struct Model {
  DecoderParams params;
  WaveConfig wave;
  OperatorVariant variant = OperatorVariant::combinatorial;
  bool train_embedding = true;
};

Model make_model(const TrainConfig& config, int input_dim, int output_dim);

// Whether the encoder output is independent of trainable parameters, so the
// propagated sequences can be reused across epochs.
bool encoder_input_is_fixed(const Model& model);

// Node matrix handed to the wave encoder: the embedded features for
// pre-propagation placement, the raw features otherwise.
NodeMatrix encoder_input(const Model& model, const NodeMatrix& features, NodeEmbedding* embedding = nullptr);

struct PipelineForward {
  std::vector<int> vertices;
  NodeEmbedding embedding;  // filled for pre-propagation placement
  ForwardResult decoded;    // outputs d1 x |vertices|
};

// embed -> propagate -> decode for the given vertices. `cached` replaces the
// propagation step when the encoder input is fixed.
PipelineForward pipeline_forward(const Model& model, const LaplacianOperator& op, const NodeMatrix& features,
                                 std::span<const int> vertices, const ForwardOptions& options = {},
                                 const VertexSequences* cached = nullptr);

struct PipelineGradient {
  GradientSet grads;
  NodeMatrix feature_grad;  // n x d0, only when requested
};

// Gradients of sum_b <output_grad_b, y_b> through decoder, encoder adjoint
// and the node embedding.
PipelineGradient pipeline_backward(const Model& model, const LaplacianOperator& op, const NodeMatrix& features,
                                   const PipelineForward& forward, const Eigen::MatrixXd& output_grad,
                                   bool want_feature_grad = false);

// Inference outputs (d1 x |vertices|), decoded in chunks.
Eigen::MatrixXd predict(const Model& model, const LaplacianOperator& op, const NodeMatrix& features,
                        std::span<const int> vertices);

enum class Metric { accuracy, mae };

// Accuracy (classification) or MAE (regression) over the masked vertices.
double evaluate(const Model& model, const Graph& graph, const LaplacianOperator& op, const std::vector<bool>& mask,
                Metric metric);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_metric = 0.0;
  double val_loss = 0.0;
  double val_metric = 0.0;
  double learning_rate = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::string metric_name;
  int best_epoch = -1;
  double best_val_metric = 0.0;
  double test_metric = 0.0;  // at the best-validation checkpoint
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string split_provenance;
  bool stopped_early = false;
  std::vector<std::string> warnings;
  double wall_clock_seconds = 0.0;

  // Deterministic content only; wall-clock is written separately.
  Json to_json() const;
};

struct TrainResult {
  Model model;  // best-validation checkpoint
  TrainReport report;
};

TrainResult train(const Graph& graph, const TrainConfig& config, const std::string& split_provenance = "bundle");

// Versioned JSON checkpoint: architecture tag, dims, settings, seed and the
// flat parameter array in checkpoint order.
Json checkpoint_to_json(const Model& model);
Model checkpoint_from_json(const Json& j);
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace glaudio
