#include "glaudio/adam.hpp"

#include <cmath>

#include "glaudio/error.hpp"

namespace glaudio {

void adam_step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads,
               AdamState& state, const AdamOptions& options) {
  if (params.size() != grads.size()) throw Error(ErrorCode::ShapeMismatch, "parameter/gradient tensor count");
  if (state.first_moment.empty() && state.step == 0) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) throw Error(ErrorCode::ShapeMismatch, "optimizer state size");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size() != grads[k].size() || state.first_moment[k].size() != params[k].size()) {
      throw Error(ErrorCode::ShapeMismatch, "tensor " + std::to_string(k) + " shape");
    }
  }

  ++state.step;
  const double lr = options.learning_rate;
  const double bc1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    auto p = params[k];
    auto g = grads[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] -= lr * options.weight_decay * p[i];
      m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g[i];
      v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

}  // namespace glaudio
