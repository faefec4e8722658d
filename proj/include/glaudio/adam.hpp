#pragma once

#include <span>
#include <vector>

namespace glaudio {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled: p -= lr * wd * p before the Adam update
};

struct AdamState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  long step = 0;
};

// One Adam step with bias correction over a list of tensors. The state is
// sized on first use; later calls must pass the same tensor shapes.
void adam_step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads,
               AdamState& state, const AdamOptions& options);

}  // namespace glaudio
