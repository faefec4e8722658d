#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "glaudio/decoder.hpp"
#include "glaudio/graph.hpp"
#include "glaudio/wave.hpp"

namespace glaudio {

using Json = nlohmann::json;

enum class LossKind { cross_entropy, l1 };
enum class Schedule { constant, reduce_on_plateau };

/// Everything one training run needs. Serialized as nested JSON with the
/// sections dataset / model / encoder / optim / train; unknown keys are
/// rejected and values are type-checked against the defaults.
struct TrainConfig {
  // dataset
  std::string bundle;
  std::uint64_t split_seed = 0;

  // model
  Architecture architecture = Architecture::cornn;
  int num_layers = 1;
  int hidden_dim = 32;
  Activation activation = Activation::leaky_relu;
  EmbeddingPlacement placement = EmbeddingPlacement::pre_propagation;
  Activation embedding_activation = Activation::identity;
  bool train_embedding = true;
  bool include_velocity = false;
  CornnScalars cornn;

  // encoder
  int num_steps = 10;
  double step_size = 0.1;
  bool normalized_laplacian = false;
  bool self_loops = false;

  // optim
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Schedule schedule = Schedule::reduce_on_plateau;
  double plateau_factor = 0.5;
  int plateau_patience = 10;
  double min_lr = 1e-5;

  // train
  int epochs = 300;
  double dropout = 0.0;
  LossKind loss = LossKind::cross_entropy;
  int early_stopping_patience = 0;  // 0 disables early stopping
  int batch_size = 0;               // 0 = full batch
  std::uint64_t seed = 0;
  bool cache_signal = true;

  WaveConfig wave() const { return WaveConfig{num_steps, step_size}; }
  OperatorVariant variant() const { return operator_variant_for(normalized_laplacian, self_loops); }
  void validate() const;

  Json to_json() const;
  // Strict: rejects unknown keys and mistyped values (InvalidConfig).
  static TrainConfig from_json(const Json& j);
  // FNV-1a of the canonical JSON dump, as 16 hex digits.
  std::string hash() const;
};

// Applies "section.key=value" overrides; the value is parsed as JSON when
// possible, otherwise taken as a string.
Json apply_overrides(Json config, const std::vector<std::string>& overrides);

TrainConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

std::string fnv1a_hex(const std::string& bytes);

}  // namespace glaudio
