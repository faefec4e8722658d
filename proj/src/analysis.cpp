#include "glaudio/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "glaudio/error.hpp"

namespace glaudio {

namespace {

double quadratic_form(const LaplacianOperator& op, const NodeMatrix& x) {
  if (x.rows() != op.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "node matrix has " + std::to_string(x.rows()) +
                                                  " rows, operator dimension " + std::to_string(op.dimension()));
  }
  return (x.array() * op.apply(x).array()).sum();
}

EnergyTrace finish_trace(std::vector<double> e) {
  EnergyTrace t;
  t.energies = std::move(e);
  if (!t.energies.empty()) {
    const double e0 = t.energies.front();
    const double denom = std::max(e0, 1e-12);
    for (double ei : t.energies) t.max_relative_drift = std::max(t.max_relative_drift, std::abs(ei - e0) / denom);
  }
  t.flagged = t.max_relative_drift > 1.0;
  return t;
}

void check_vertex(int v, int n) {
  if (v < 0 || v >= n) throw Error(ErrorCode::VertexOutOfRange, "vertex " + std::to_string(v));
}

}  // namespace

double dirichlet_energy(const LaplacianOperator& op, const NodeMatrix& x) { return quadratic_form(op, x); }

EnergyTrace energy_trace(const WaveSignal& signal, const LaplacianOperator& op) {
  std::vector<double> e;
  e.reserve(signal.positions.size());
  for (std::size_t i = 0; i < signal.positions.size(); ++i) {
    e.push_back(0.5 * signal.velocities[i].squaredNorm() + 0.5 * quadratic_form(op, signal.positions[i]));
  }
  return finish_trace(std::move(e));
}

EnergyTrace exact_energy_trace(const LaplacianOperator& op, const SpectralDecomposition& dec, const NodeMatrix& x0,
                               std::span<const double> times) {
  const auto xs = exact_signal(dec, x0, times);
  const auto vs = exact_velocity(dec, x0, times);
  std::vector<double> e;
  for (std::size_t i = 0; i < xs.size(); ++i) e.push_back(0.5 * vs[i].squaredNorm() + 0.5 * quadratic_form(op, xs[i]));
  return finish_trace(std::move(e));
}

double symplectic_drift_bound(double h_omega) {
  if (!(h_omega >= 0.0 && h_omega < 2.0)) return std::numeric_limits<double>::infinity();
  const double a = 0.5 * h_omega;
  return a / (1.0 - a);
}

double oversmoothing_metric(const LaplacianOperator& op, const NodeMatrix& y) {
  const auto& m = op.matrix;
  if (y.rows() != m.rows) throw Error(ErrorCode::DimensionMismatch, "node matrix/operator");
  if (m.rows == 0) return 0.0;
  double sum = 0.0;
  for (int r = 0; r < m.rows; ++r) {
    for (int k = m.row_ptr[static_cast<std::size_t>(r)]; k < m.row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      const int c = m.col_index[static_cast<std::size_t>(k)];
      if (c > r && m.values[static_cast<std::size_t>(k)] != 0.0) sum += (y.row(r) - y.row(c)).squaredNorm();
    }
  }
  return std::sqrt(sum / m.rows);
}

double sensitivity(const Model& model, const LaplacianOperator& op, const NodeMatrix& features, int v, int u,
                   double delta) {
  check_vertex(v, op.dimension());
  check_vertex(u, op.dimension());
  const double scale = features.size() > 0 ? features.cwiseAbs().maxCoeff() : 0.0;
  const double step = delta * (scale > 0.0 ? scale : 1.0);
  const int target[] = {v};
  double sq = 0.0;
  NodeMatrix x = features;
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const double orig = x(u, c);
    x(u, c) = orig + step;
    const Eigen::VectorXd yp = predict(model, op, x, target).col(0);
    x(u, c) = orig - step;
    const Eigen::VectorXd ym = predict(model, op, x, target).col(0);
    x(u, c) = orig;
    sq += ((yp - ym) / (2.0 * step)).squaredNorm();
  }
  return std::sqrt(sq);
}

double sensitivity_analytic(const Model& model, const LaplacianOperator& op, const NodeMatrix& features, int v,
                            int u) {
  check_vertex(v, op.dimension());
  check_vertex(u, op.dimension());
  const int target[] = {v};
  const auto fwd = pipeline_forward(model, op, features, target);
  double sq = 0.0;
  for (int k = 0; k < model.params.dims.output_dim; ++k) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(model.params.dims.output_dim, 1);
    g(k, 0) = 1.0;
    const auto back = pipeline_backward(model, op, features, fwd, g, true);
    sq += back.feature_grad.row(u).squaredNorm();
  }
  return std::sqrt(sq);
}

double encoder_sensitivity_fd(const LaplacianOperator& op, const WaveConfig& wave, int feature_dim, int v, int u,
                              double delta) {
  check_vertex(v, op.dimension());
  check_vertex(u, op.dimension());
  const int target[] = {v};
  NodeMatrix x = NodeMatrix::Zero(op.dimension(), feature_dim);
  double sq = 0.0;
  for (int c = 0; c < feature_dim; ++c) {
    x(u, c) = delta;
    const auto sp = propagate_streaming(op, x, wave, target);
    x(u, c) = -delta;
    const auto sm = propagate_streaming(op, x, wave, target);
    x(u, c) = 0.0;
    for (std::size_t i = 0; i < sp.steps.size(); ++i) sq += ((sp.steps[i] - sm.steps[i]) / (2.0 * delta)).squaredNorm();
  }
  return std::sqrt(sq);
}

double encoder_sensitivity_forward(const LaplacianOperator& op, const WaveConfig& wave, int feature_dim, int v,
                                   int u) {
  check_vertex(v, op.dimension());
  check_vertex(u, op.dimension());
  const int target[] = {v};
  NodeMatrix e = NodeMatrix::Zero(op.dimension(), 1);
  e(u, 0) = 1.0;
  const auto s = propagate_streaming(op, e, wave, target);
  double sq = 0.0;
  for (const auto& step : s.steps) sq += step(0, 0) * step(0, 0);
  return std::sqrt(feature_dim * sq);
}

double encoder_sensitivity_spectral(const SpectralDecomposition& dec, const WaveConfig& wave, int feature_dim, int v,
                                    int u) {
  check_vertex(v, dec.size());
  check_vertex(u, dec.size());
  wave.validate();
  const double h = wave.step_size;
  std::vector<double> x(static_cast<std::size_t>(dec.size()), 1.0), vel(static_cast<std::size_t>(dec.size()), 0.0);
  double sq = 0.0;
  for (int i = 0; i < wave.num_steps; ++i) {
    double entry = 0.0;
    for (int m = 0; m < dec.size(); ++m) {
      auto& xm = x[static_cast<std::size_t>(m)];
      auto& vm = vel[static_cast<std::size_t>(m)];
      vm -= h * dec.eigenvalues(m) * xm;
      xm += h * vm;
      entry += dec.eigenvectors(v, m) * dec.eigenvectors(u, m) * xm;
    }
    sq += entry * entry;
  }
  return std::sqrt(feature_dim * sq);
}

Json SweepResult::to_json() const {
  Json j;
  j["fixed_stop_time"] = fixed_stop_time;
  j["metric"] = metric_name;
  Json arr = Json::array();
  for (const auto& e : entries) {
    arr.push_back({{"num_steps", e.num_steps},
                   {"step_size", e.step_size},
                   {"stop_time", e.stop_time},
                   {"mean_metric", e.mean_metric},
                   {"std_metric", e.std_metric},
                   {"seeds", e.seeds},
                   {"metrics", e.metrics},
                   {"mean_oversmoothing", e.mean_oversmoothing}});
  }
  j["entries"] = arr;
  return j;
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "num_steps,step_size,stop_time,mean_metric,std_metric,num_seeds,mean_oversmoothing\n";
  for (const auto& e : entries) {
    out << e.num_steps << ',' << e.step_size << ',' << e.stop_time << ',' << e.mean_metric << ',' << e.std_metric
        << ',' << e.seeds.size() << ',' << e.mean_oversmoothing << '\n';
  }
  return out.str();
}

std::string SweepResult::to_gnuplot() const {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "# N mean_" << metric_name << " std_" << metric_name << " mu\n";
  for (const auto& e : entries) {
    out << e.num_steps << ' ' << e.mean_metric << ' ' << e.std_metric << ' ' << e.mean_oversmoothing << '\n';
  }
  return out.str();
}

ConvergenceReport convergence_study(const LaplacianOperator& op, const NodeMatrix& x0, double h, double stop_time,
                                    int levels) {
  if (levels < 2) throw Error(ErrorCode::InvalidArgument, "convergence study needs at least two levels");
  if (!(h > 0.0) || !(stop_time > 0.0)) throw Error(ErrorCode::InvalidArgument, "h and T must be positive");
  const auto dec = eigendecompose(op);
  ConvergenceReport rep;
  std::vector<double> lx, le;
  for (int l = 0; l < levels; ++l) {
    ConvergenceLevel lev;
    lev.step_size = h / std::pow(2.0, l);
    lev.num_steps = std::max(1, static_cast<int>(std::lround(stop_time / lev.step_size)));
    const auto sig = propagate(op, x0, WaveConfig{lev.num_steps, lev.step_size});
    std::vector<double> times;
    for (int i = 0; i <= lev.num_steps; ++i) times.push_back(i * lev.step_size);
    const auto exact = exact_signal(dec, x0, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      lev.max_deviation = std::max(lev.max_deviation, (sig.positions[i] - exact[i]).cwiseAbs().maxCoeff());
    }
    rep.finite = rep.finite && std::isfinite(lev.max_deviation);
    if (lev.max_deviation > 0.0) {
      lx.push_back(std::log(lev.step_size));
      le.push_back(std::log(lev.max_deviation));
    }
    rep.levels.push_back(lev);
  }
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(le.begin(), le.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (le[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.order = sxy / sxx;
  }
  return rep;
}

int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("GLAUDIO_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) return std::min(cap, hw);
  }
  return hw;
}

SweepResult sweep_steps(const Graph& graph, const TrainConfig& base, const std::vector<int>& step_counts,
                        const std::vector<std::uint64_t>& seeds, const std::string& split_provenance) {
  base.validate();
  if (step_counts.empty() || seeds.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs N values and seeds");
  const double T = base.num_steps * base.step_size;
  struct Job {
    int n_index;
    std::size_t seed_index;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < static_cast<int>(step_counts.size()); ++i) {
    if (step_counts[static_cast<std::size_t>(i)] < 1) throw Error(ErrorCode::InvalidConfig, "N must be >= 1");
    for (std::size_t s = 0; s < seeds.size(); ++s) jobs.push_back({i, s});
  }
  std::vector<double> metric(jobs.size()), mu(jobs.size());
  std::vector<std::exception_ptr> failure(jobs.size());
  const auto op = build_operator(graph, base.variant());
  std::vector<int> all(static_cast<std::size_t>(graph.num_nodes()));
  std::iota(all.begin(), all.end(), 0);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        TrainConfig cfg = base;
        cfg.num_steps = step_counts[static_cast<std::size_t>(jobs[j].n_index)];
        cfg.step_size = T / cfg.num_steps;
        cfg.seed = seeds[jobs[j].seed_index];
        const auto res = train(graph, cfg, split_provenance);
        metric[j] = res.report.test_metric;
        const NodeMatrix y = predict(res.model, op, graph.features(), all).transpose();
        mu[j] = oversmoothing_metric(op, y);
      } catch (...) {
        failure[j] = std::current_exception();
      }
    }
  };
  const int workers = std::min<int>(thread_budget(), static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failure)
    if (f) std::rethrow_exception(f);

  SweepResult out;
  out.fixed_stop_time = true;
  out.metric_name = base.loss == LossKind::l1 ? "mae" : "accuracy";
  for (std::size_t i = 0; i < step_counts.size(); ++i) {
    SweepEntry e;
    e.num_steps = step_counts[i];
    e.step_size = T / e.num_steps;
    e.stop_time = T;
    e.seeds = seeds;
    double mu_sum = 0.0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].n_index != static_cast<int>(i)) continue;
      e.metrics.push_back(metric[j]);
      mu_sum += mu[j];
    }
    const double n = static_cast<double>(e.metrics.size());
    e.mean_metric = std::accumulate(e.metrics.begin(), e.metrics.end(), 0.0) / n;
    double ss = 0.0;
    for (double m : e.metrics) ss += (m - e.mean_metric) * (m - e.mean_metric);
    e.std_metric = e.metrics.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    e.mean_oversmoothing = mu_sum / n;
    out.entries.push_back(std::move(e));
  }
  return out;
}

DecayFit fit_exponential_decay(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "decay fit needs at least two (x, y) pairs");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "decay fit needs positive values");
    const double ly = std::log(y[i]);
    sx += x[i];
    sy += ly;
    sxx += x[i] * x[i];
    sxy += x[i] * ly;
    syy += ly * ly;
  }
  const double vx = sxx - sx * sx / n;
  if (vx <= 0.0) throw Error(ErrorCode::InvalidArgument, "decay fit needs distinct x values");
  const double slope = (sxy - sx * sy / n) / vx;
  DecayFit f;
  f.rate = -slope;
  f.log_scale = (sy - slope * sx) / n;
  const double vy = syy - sy * sy / n;
  f.r_squared = vy > 0.0 ? (slope * slope * vx) / vy : 1.0;
  return f;
}

}  // namespace glaudio
