#include "glaudio/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "glaudio/error.hpp"

namespace glaudio {

Eigen::MatrixXd SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

SpectralDecomposition SpectralDecomposition::squared() const {
  SpectralDecomposition sq = *this;
  sq.eigenvalues = eigenvalues.array().square().matrix();
  return sq;
}

SpectralDecomposition eigendecompose_dense(const Eigen::MatrixXd& symmetric, OperatorVariant source,
                                           int oracle_limit) {
  const auto n = symmetric.rows();
  if (n > oracle_limit) {
    throw Error(ErrorCode::TooLargeForOracle,
                std::to_string(n) + " vertices exceeds oracle limit " + std::to_string(oracle_limit));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::ConvergenceFailure, "symmetric eigensolver");

  SpectralDecomposition dec;
  dec.source = source;
  dec.eigenvalues = solver.eigenvalues();
  dec.eigenvectors = solver.eigenvectors();
  for (Eigen::Index i = 0; i < n; ++i) {
    double& lam = dec.eigenvalues(i);
    if (lam < 0.0 && lam >= -1e-9) lam = 0.0;

    auto col = dec.eigenvectors.col(i);
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      // Ties within round-off go to the lowest index.
      if (std::abs(col(j)) > best * (1.0 + 1e-12) + 1e-15) {
        best = std::abs(col(j));
        arg = j;
      }
    }
    if (col(arg) < 0.0) col = -col;
  }
  return dec;
}

SpectralDecomposition eigendecompose(const LaplacianOperator& op, int oracle_limit) {
  if (op.dimension() > oracle_limit) {
    throw Error(ErrorCode::TooLargeForOracle, std::to_string(op.dimension()) + " vertices exceeds oracle limit " +
                                                  std::to_string(oracle_limit));
  }
  return eigendecompose_dense(op.matrix.to_dense(), op.variant, oracle_limit);
}

namespace {

template <typename ModeFn>
std::vector<NodeMatrix> modal_sum(const SpectralDecomposition& dec, const NodeMatrix& x0,
                                  std::span<const double> times, ModeFn mode) {
  if (x0.rows() != dec.size()) throw Error(ErrorCode::DimensionMismatch, "features/decomposition size");
  const Eigen::MatrixXd coeff = dec.eigenvectors.transpose() * x0;  // n x d, <phi_i, x0> per column
  std::vector<NodeMatrix> out;
  out.reserve(times.size());
  for (double t : times) {
    Eigen::VectorXd scale(dec.size());
    for (int i = 0; i < dec.size(); ++i) scale(i) = mode(std::sqrt(std::max(dec.eigenvalues(i), 0.0)), t);
    out.emplace_back(dec.eigenvectors * scale.asDiagonal() * coeff);
  }
  return out;
}

}  // namespace

std::vector<NodeMatrix> exact_signal(const SpectralDecomposition& dec, const NodeMatrix& x0,
                                     std::span<const double> times) {
  return modal_sum(dec, x0, times, [](double w, double t) { return std::cos(w * t); });
}

std::vector<NodeMatrix> exact_velocity(const SpectralDecomposition& dec, const NodeMatrix& x0,
                                       std::span<const double> times) {
  return modal_sum(dec, x0, times, [](double w, double t) { return -w * std::sin(w * t); });
}

std::vector<NodeMatrix> moment_sequence(const LaplacianOperator& op, const NodeMatrix& x0, int n_max) {
  if (n_max < 0) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 0");
  if (x0.rows() != op.dimension()) throw Error(ErrorCode::DimensionMismatch, "features/operator");
  std::vector<NodeMatrix> moments;
  moments.reserve(static_cast<std::size_t>(n_max) + 1);
  moments.push_back(x0);
  for (int k = 1; k <= n_max; ++k) moments.push_back(op.apply(moments.back()));
  return moments;
}

EncodingComparison compare_encodings(const LaplacianOperator& op_g, const NodeMatrix& x_g,
                                     const LaplacianOperator& op_h, const NodeMatrix& x_h, int n_max,
                                     std::span<const double> sample_times, double tol) {
  if (op_g.dimension() != op_h.dimension() || x_g.rows() != x_h.rows() || x_g.cols() != x_h.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "graphs must share the vertex set and feature width");
  }
  EncodingComparison cmp;
  const auto mg = moment_sequence(op_g, x_g, n_max);
  const auto mh = moment_sequence(op_h, x_h, n_max);
  // Round-off in L^k x grows like |L|_inf^k |x|_inf, so differences are
  // measured against that scale; a vanishing moment is otherwise unresolvable.
  auto inf_norm = [](const CsrMatrix& m) {
    double worst = 0.0;
    for (int r = 0; r < m.rows; ++r) {
      double row = 0.0;
      for (int p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) row += std::abs(m.values[p]);
      worst = std::max(worst, row);
    }
    return worst;
  };
  const double growth = std::max({1.0, inf_norm(op_g.matrix), inf_norm(op_h.matrix)});
  double power_scale = std::max({x_g.size() ? x_g.cwiseAbs().maxCoeff() : 0.0,
                                 x_h.size() ? x_h.cwiseAbs().maxCoeff() : 0.0});
  cmp.moments_agree = true;
  for (int k = 0; k <= n_max; ++k) {
    const double scale =
        std::max({1.0, mg[k].cwiseAbs().maxCoeff(), mh[k].cwiseAbs().maxCoeff(), power_scale});
    power_scale *= growth;
    const double diff = (mg[k] - mh[k]).cwiseAbs().maxCoeff() / scale;
    cmp.max_moment_difference = std::max(cmp.max_moment_difference, diff);
    if (diff > tol && cmp.moments_agree) {
      cmp.moments_agree = false;
      cmp.first_differing_moment = k;
    }
  }

  const auto dg = eigendecompose(op_g);
  const auto dh = eigendecompose(op_h);
  const auto sg = exact_signal(dg, x_g, sample_times);
  const auto sh = exact_signal(dh, x_h, sample_times);
  for (std::size_t j = 0; j < sample_times.size(); ++j) {
    cmp.max_signal_difference = std::max(cmp.max_signal_difference, (sg[j] - sh[j]).cwiseAbs().maxCoeff());
  }
  cmp.signals_agree = cmp.max_signal_difference <= tol;
  return cmp;
}

ReceptiveField receptive_field(const SpectralDecomposition& dec, int vertex, double tol) {
  if (vertex < 0 || vertex >= dec.size()) throw Error(ErrorCode::VertexOutOfRange, "vertex " + std::to_string(vertex));
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  ReceptiveField rf;
  rf.vertex = vertex;
  rf.tol = tol;
  for (int i = 0; i < dec.size(); ++i) {
    const double scale = dec.eigenvectors.col(i).cwiseAbs().maxCoeff();
    if (std::abs(dec.eigenvectors(vertex, i)) > tol * scale) rf.member_indices.push_back(i);
  }
  const double gap_tol = tol * std::max(1.0, dec.size() > 0 ? std::abs(dec.eigenvalues(dec.size() - 1)) : 1.0);
  for (int i = 1; i < dec.size(); ++i) {
    if (dec.eigenvalues(i) - dec.eigenvalues(i - 1) <= gap_tol) rf.unique_spectrum = false;
  }
  return rf;
}

std::vector<double> quadrature_grid(int k, int quadrature_steps) {
  std::vector<double> s(static_cast<std::size_t>(quadrature_steps) + 1);
  const double span = 2.0 * std::numbers::pi * k;
  for (int j = 0; j <= quadrature_steps; ++j) s[j] = span * j / quadrature_steps;
  return s;
}

ProjectionRecovery recover_projections(std::span<const double> signal_v, const SpectralDecomposition& dec, int vertex,
                                       int k, int quadrature_steps) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "frequency scale k must be >= 1");
  if (quadrature_steps < 2) throw Error(ErrorCode::InsufficientSamples, "need at least 2 quadrature steps");
  if (static_cast<int>(signal_v.size()) != quadrature_steps + 1) {
    throw Error(ErrorCode::InsufficientSamples, "signal has " + std::to_string(signal_v.size()) +
                                                    " samples, expected " + std::to_string(quadrature_steps + 1));
  }
  const int n = dec.size();
  for (int i = 0; i < n; ++i) {
    const double scaled = k * dec.eigenvalues(i);
    if (std::abs(scaled - std::round(scaled)) > 1e-9) {
      std::ostringstream msg;
      msg << "k * lambda_" << i << " = " << scaled << " is not integral";
      throw Error(ErrorCode::NonIntegralSpectrum, msg.str());
    }
    if (i > 0 && std::abs(dec.eigenvalues(i) - dec.eigenvalues(i - 1)) <= 1e-9) {
      throw Error(ErrorCode::RepeatedEigenvalues, "eigenvalue " + std::to_string(dec.eigenvalues(i)) + " repeated");
    }
  }
  const auto rf = receptive_field(dec, vertex);
  // Sampling must resolve the highest mode: ask for >= 8 points per period.
  const double max_freq = dec.eigenvalues.cwiseAbs().maxCoeff();
  if (quadrature_steps < 8.0 * k * max_freq) {
    throw Error(ErrorCode::InsufficientSamples, "too few quadrature steps for the highest frequency");
  }

  const auto grid = quadrature_grid(k, quadrature_steps);
  const double ds = grid[1] - grid[0];
  const double norm = 1.0 / (std::numbers::pi * k);

  ProjectionRecovery out;
  out.member_indices = rf.member_indices;
  for (int i : rf.member_indices) {
    const double lam = dec.eigenvalues(i);
    double acc = 0.0;
    for (int j = 0; j <= quadrature_steps; ++j) {
      const double w = (j == 0 || j == quadrature_steps) ? 0.5 : 1.0;
      acc += w * std::cos(lam * grid[j]) * signal_v[j];
    }
    double value = norm * ds * acc / dec.eigenvectors(vertex, i);
    if (std::round(k * lam) == 0.0) value *= 0.5;
    out.projections.push_back(value);
  }
  return out;
}

}  // namespace glaudio
