#pragma once

#include <vector>

#include "glaudio/types.hpp"

namespace glaudio {

struct LossResult {
  double loss = 0.0;
  NodeMatrix grad;  // same shape as the prediction, zero off-mask
};

// Mean over masked rows of -log softmax(logits)[label], max-subtracted.
LossResult masked_cross_entropy(const NodeMatrix& logits, const std::vector<int>& labels,
                                const std::vector<bool>& mask);

// Mean absolute error over masked entries; subgradient 0 at zero residual.
LossResult l1_loss(const NodeMatrix& pred, const NodeMatrix& target, const std::vector<bool>& mask);

// Fraction of masked rows whose argmax (lowest index on ties) equals the label.
double accuracy(const NodeMatrix& logits, const std::vector<int>& labels, const std::vector<bool>& mask);
double mean_absolute_error(const NodeMatrix& pred, const NodeMatrix& target, const std::vector<bool>& mask);

}  // namespace glaudio
