#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glaudio/config.hpp"
#include "glaudio/graph.hpp"
#include "glaudio/spectral.hpp"
#include "glaudio/trainer.hpp"
#include "glaudio/wave.hpp"

namespace glaudio {

// trace(x^T L x).
double dirichlet_energy(const LaplacianOperator& op, const NodeMatrix& x);

struct EnergyTrace {
  std::vector<double> energies;  // E^0..E^N
  double max_relative_drift = 0.0;
  bool flagged = false;  // drift above 1
};

// E^i = |V^i|^2 / 2 + (X^i . L X^i) / 2 with drift max_i |E^i - E^0| / max(E^0, 1e-12).
EnergyTrace energy_trace(const WaveSignal& signal, const LaplacianOperator& op);

// Same energy for the exact signal at the given times.
EnergyTrace exact_energy_trace(const LaplacianOperator& op, const SpectralDecomposition& dec, const NodeMatrix& x0,
                               std::span<const double> times);

// Largest relative energy drift of one symplectic-Euler mode with h*omega < 2:
// (h omega / 2) / (1 - h omega / 2).
double symplectic_drift_bound(double h_omega);

// mu(Y) = sqrt((1/n) sum over edges |Y_u - Y_v|^2), edges taken from the
// operator's off-diagonal pattern.
double oversmoothing_metric(const LaplacianOperator& op, const NodeMatrix& y);

// |dy_v / dx_u| as the Frobenius norm of the Jacobian block, by central
// differences re-running encoder and decoder. The step is delta times the
// largest absolute feature (or delta when features are all zero).
double sensitivity(const Model& model, const LaplacianOperator& op, const NodeMatrix& features, int v, int u,
                   double delta = 1e-4);
// Same quantity through the backward pass (decoder BPTT, encoder adjoint, embedding).
double sensitivity_analytic(const Model& model, const LaplacianOperator& op, const NodeMatrix& features, int v, int u);

// Encoder alone: the map x -> (X^1_v, .., X^N_v) is linear with blocks
// p_i(L)_{vu} * I_d. These return the Frobenius norm of the u-block.
double encoder_sensitivity_fd(const LaplacianOperator& op, const WaveConfig& wave, int feature_dim, int v, int u,
                              double delta = 1e-4);
double encoder_sensitivity_forward(const LaplacianOperator& op, const WaveConfig& wave, int feature_dim, int v, int u);
// Per-mode scalar recurrence on the eigendecomposition; an independent check.
double encoder_sensitivity_spectral(const SpectralDecomposition& dec, const WaveConfig& wave, int feature_dim, int v,
                                    int u);

struct SweepEntry {
  int num_steps = 0;
  double step_size = 0.0;
  double stop_time = 0.0;
  double mean_metric = 0.0;
  double std_metric = 0.0;  // sample standard deviation, 0 for one seed
  std::vector<std::uint64_t> seeds;
  std::vector<double> metrics;
  double mean_oversmoothing = 0.0;  // mu of the decoder outputs over all vertices
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  bool fixed_stop_time = true;
  std::string metric_name;

  Json to_json() const;
  std::string to_csv() const;
  std::string to_gnuplot() const;
};

// Trains once per (N, seed) with h = T / N, T taken from the base config.
// Runs in parallel up to GLAUDIO_THREADS workers; aggregation follows input order.
SweepResult sweep_steps(const Graph& graph, const TrainConfig& base, const std::vector<int>& step_counts,
                        const std::vector<std::uint64_t>& seeds, const std::string& split_provenance = "bundle");

struct DecayFit {
  double rate = 0.0;       // c2 in y = c1 exp(-c2 x)
  double log_scale = 0.0;  // log c1
  double r_squared = 0.0;
};

// Least-squares line through (x, log y). Values must be positive.
DecayFit fit_exponential_decay(std::span<const double> x, std::span<const double> y);

struct ConvergenceLevel {
  double step_size = 0.0;
  int num_steps = 0;
  double max_deviation = 0.0;  // max over grid times i*h of |X^i - X(i h)|
};

struct ConvergenceReport {
  std::vector<ConvergenceLevel> levels;  // h, h/2, h/4, ...
  double order = 0.0;                    // least-squares slope of log error vs log h
  bool finite = true;
};

// Encoder against the exact signal at the grid times, halving h each level
// at fixed stop time T (N = round(T / h)).
ConvergenceReport convergence_study(const LaplacianOperator& op, const NodeMatrix& x0, double h, double stop_time,
                                    int levels = 3);

// Worker cap from GLAUDIO_THREADS (default: hardware concurrency, at least 1).
int thread_budget();

}  // namespace glaudio
