#include "glaudio/losses.hpp"

#include <cmath>

#include "glaudio/error.hpp"

namespace glaudio {

namespace {

std::size_t count_mask(const std::vector<bool>& mask, Eigen::Index rows) {
  if (static_cast<Eigen::Index>(mask.size()) != rows) throw Error(ErrorCode::DimensionMismatch, "mask length");
  std::size_t c = 0;
  for (bool m : mask) c += m ? 1 : 0;
  if (c == 0) throw Error(ErrorCode::EmptyMask, "mask selects no vertices");
  return c;
}

void check_label(int label, Eigen::Index classes, Eigen::Index row) {
  if (label < 0 || label >= classes) {
    throw Error(ErrorCode::LabelOutOfRange,
                "label " + std::to_string(label) + " at row " + std::to_string(row) + " outside [0, " +
                    std::to_string(classes) + ")");
  }
}

}  // namespace

LossResult masked_cross_entropy(const NodeMatrix& logits, const std::vector<int>& labels,
                                const std::vector<bool>& mask) {
  const std::size_t count = count_mask(mask, logits.rows());
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "label count");
  }
  LossResult r;
  r.grad = NodeMatrix::Zero(logits.rows(), logits.cols());
  const double inv = 1.0 / static_cast<double>(count);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    check_label(labels[i], logits.cols(), i);
    const auto row = logits.row(i);
    const double m = row.maxCoeff();
    const Eigen::RowVectorXd e = (row.array() - m).exp().matrix();
    const double z = e.sum();
    r.loss += (std::log(z) - (row(labels[i]) - m)) * inv;
    r.grad.row(i) = e / z * inv;
    r.grad(i, labels[i]) -= inv;
  }
  return r;
}

LossResult l1_loss(const NodeMatrix& pred, const NodeMatrix& target, const std::vector<bool>& mask) {
  const std::size_t count = count_mask(mask, pred.rows());
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction/target shape");
  }
  LossResult r;
  r.grad = NodeMatrix::Zero(pred.rows(), pred.cols());
  const double inv = 1.0 / (static_cast<double>(count) * static_cast<double>(pred.cols()));
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    if (!mask[i]) continue;
    for (Eigen::Index j = 0; j < pred.cols(); ++j) {
      const double res = pred(i, j) - target(i, j);
      r.loss += std::abs(res) * inv;
      r.grad(i, j) = res > 0.0 ? inv : (res < 0.0 ? -inv : 0.0);
    }
  }
  return r;
}

double accuracy(const NodeMatrix& logits, const std::vector<int>& labels, const std::vector<bool>& mask) {
  const std::size_t count = count_mask(mask, logits.rows());
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    Eigen::Index arg = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, arg)) arg = c;
    if (arg == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(count);
}

double mean_absolute_error(const NodeMatrix& pred, const NodeMatrix& target, const std::vector<bool>& mask) {
  return l1_loss(pred, target, mask).loss;
}

}  // namespace glaudio
