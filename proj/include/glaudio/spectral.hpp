#pragma once

#include <span>
#include <vector>

#include "glaudio/graph.hpp"
#include "glaudio/types.hpp"

namespace glaudio {

inline constexpr int kDefaultOracleLimit = 2000;

/// Dense eigendecomposition L = U diag(lambda) U^T with ascending eigenvalues.
/// Each eigenvector is signed so that its largest-magnitude entry is positive
/// (ties resolved towards the lowest index).
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // columns are phi_i
  OperatorVariant source = OperatorVariant::combinatorial;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  Eigen::MatrixXd reconstruct() const;
  // Decomposition of L^2: same eigenvectors, eigenvalues squared. Its wave
  // signal oscillates at the eigenvalues of L themselves.
  SpectralDecomposition squared() const;
};

SpectralDecomposition eigendecompose(const LaplacianOperator& op, int oracle_limit = kDefaultOracleLimit);
SpectralDecomposition eigendecompose_dense(const Eigen::MatrixXd& symmetric, OperatorVariant source,
                                           int oracle_limit = kDefaultOracleLimit);

// X(t) = sum_i phi_i cos(sqrt(lambda_i) t) <phi_i, x0>, one snapshot per time.
std::vector<NodeMatrix> exact_signal(const SpectralDecomposition& dec, const NodeMatrix& x0,
                                     std::span<const double> times);
// dX/dt(t) = -sum_i phi_i sqrt(lambda_i) sin(sqrt(lambda_i) t) <phi_i, x0>.
std::vector<NodeMatrix> exact_velocity(const SpectralDecomposition& dec, const NodeMatrix& x0,
                                       std::span<const double> times);

// [x0, L x0, ..., L^n_max x0] by repeated sparse products.
std::vector<NodeMatrix> moment_sequence(const LaplacianOperator& op, const NodeMatrix& x0, int n_max);

struct EncodingComparison {
  bool moments_agree = false;
  bool signals_agree = false;
  int first_differing_moment = -1;  // -1 when all agree
  double max_moment_difference = 0.0;
  double max_signal_difference = 0.0;
  // Moments and signals must agree together; a split verdict is an internal
  // error of the oracle.
  bool consistent() const { return moments_agree == signals_agree; }
};

// Moment tolerance is relative to max(1, |moment|); signal tolerance is
// absolute.
EncodingComparison compare_encodings(const LaplacianOperator& op_g, const NodeMatrix& x_g,
                                     const LaplacianOperator& op_h, const NodeMatrix& x_h, int n_max,
                                     std::span<const double> sample_times, double tol = 1e-9);

struct ReceptiveField {
  int vertex = 0;
  std::vector<int> member_indices;  // 0-based eigenvector indices
  double tol = 1e-8;
  bool unique_spectrum = true;
};

// Membership: |phi_i(v)| > tol * max_j |phi_i(j)|.
ReceptiveField receptive_field(const SpectralDecomposition& dec, int vertex, double tol = 1e-8);

struct ProjectionRecovery {
  std::vector<int> member_indices;
  std::vector<double> projections;  // estimates of <phi_i, x>, i in member_indices
};

// Recovers <phi_i, x> for i in the receptive field of v from the signal
// X_v(s) = sum_j phi_j(v) cos(lambda_j s) <phi_j, x> sampled at
// quadrature_steps + 1 uniform points on [0, 2 pi k]. Uses the trapezoid rule
// for (1 / pi k) * integral of cos(lambda_i s) X_v(s) / phi_i(v); the
// lambda = 0 mode is halved.
ProjectionRecovery recover_projections(std::span<const double> signal_v, const SpectralDecomposition& dec, int vertex,
                                       int k, int quadrature_steps);

// Samples s_j = 2 pi k j / steps, j = 0..steps.
std::vector<double> quadrature_grid(int k, int quadrature_steps);

}  // namespace glaudio
