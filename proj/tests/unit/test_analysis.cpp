#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "../support/fixtures.hpp"
#include "glaudio/analysis.hpp"
#include "glaudio/data_io.hpp"
#include "glaudio/error.hpp"
#include "glaudio/wav.hpp"

using namespace glaudio;
using namespace glaudio::testing;

namespace {

NodeMatrix col(std::initializer_list<double> v) {
  NodeMatrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

LaplacianOperator lap(int n, std::vector<std::pair<int, int>> e) {
  return build_operator(make_graph(n, std::move(e)), OperatorVariant::combinatorial);
}

int dominant_bin(const std::vector<double>& s, int max_bin) {
  int best = 0;
  double best_mag = -1.0;
  const double n = static_cast<double>(s.size());
  for (int k = 1; k <= max_bin; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) acc += s[j] * std::polar(1.0, -2.0 * std::numbers::pi * k * j / n);
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = k;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("dirichlet_energy") {
  const auto p2 = lap(2, {{0, 1}});
  CHECK(dirichlet_energy(p2, col({1, 0})) == 1.0);
  CHECK(dirichlet_energy(p2, col({3, 3})) == 0.0);
  const auto p3 = lap(3, path_edges(3));
  const auto dec = eigendecompose(p3);
  for (int i = 0; i < 3; ++i) {
    const NodeMatrix phi = dec.eigenvectors.col(i);
    CHECK(dirichlet_energy(p3, phi) == doctest::Approx(dec.eigenvalues(i)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(dirichlet_energy(p3, col({1, 0})), Error);
}

TEST_CASE("energy_trace") {
  const auto p2 = lap(2, {{0, 1}});
  const auto zero = energy_trace(propagate(p2, NodeMatrix::Zero(2, 1), WaveConfig{50, 0.1}), p2);
  for (double e : zero.energies) CHECK(e == 0.0);

  const auto t = energy_trace(propagate(p2, col({1, 0}), WaveConfig{1000, 0.01}), p2);
  CHECK(t.energies.size() == 1001);
  CHECK(t.energies[0] == doctest::Approx(0.5));
  CHECK(t.max_relative_drift < 0.05);
  CHECK_FALSE(t.flagged);

  const double h = 2.5 / std::sqrt(2.0);
  const auto u = energy_trace(propagate(p2, col({1, 0}), WaveConfig{50, h}), p2);
  CHECK(u.max_relative_drift > 1.0);
  CHECK(u.flagged);
}

TEST_CASE("energy drift follows the single-mode bound") {
  const auto p2 = lap(2, {{0, 1}});
  for (double hw : {0.1, 0.5, 1.0}) {
    const double h = hw / std::sqrt(2.0);
    const auto t = energy_trace(propagate(p2, col({1, 0}), WaveConfig{5000, h}), p2);
    CHECK(t.max_relative_drift <= symplectic_drift_bound(hw) * (1 + 1e-9));
    CHECK(t.max_relative_drift >= 0.95 * symplectic_drift_bound(hw));
  }
  CHECK(symplectic_drift_bound(1.0) == doctest::Approx(1.0));
  CHECK(symplectic_drift_bound(0.1) == doctest::Approx(0.05 / 0.95));
}

TEST_CASE("exact energy trace is flat") {
  std::mt19937_64 rng(4);
  const auto op = lap(6, random_connected_edges(6, 0.4, rng));
  const auto dec = eigendecompose(op);
  std::vector<double> times;
  for (int i = 0; i < 200; ++i) times.push_back(0.1 * i);
  CHECK(exact_energy_trace(op, dec, random_matrix(6, 2, rng), times).max_relative_drift < 1e-8);
}

TEST_CASE("oversmoothing_metric") {
  const auto p2 = lap(2, {{0, 1}});
  CHECK(oversmoothing_metric(p2, col({4, 4})) == 0.0);
  CHECK(oversmoothing_metric(p2, col({1, 0})) == doctest::Approx(std::sqrt(0.5)));
  std::mt19937_64 rng(6);
  const auto op = lap(7, random_connected_edges(7, 0.3, rng));
  const NodeMatrix y = random_matrix(7, 3, rng);
  CHECK(oversmoothing_metric(op, -2.5 * y) == doctest::Approx(2.5 * oversmoothing_metric(op, y)));
  CHECK(oversmoothing_metric(op, y) > 0.0);
  const auto comps = lap(4, {{0, 1}, {2, 3}});
  CHECK(oversmoothing_metric(comps, col({1, 1, -2, -2})) == 0.0);
  CHECK(oversmoothing_metric(comps, col({1, 1, -2, -1.9})) > 0.0);
}

TEST_CASE("encoder sensitivity: three routes agree") {
  std::mt19937_64 rng(8);
  const int n = 6;
  const auto op = build_operator(make_graph(n, random_connected_edges(n, 0.3, rng)), OperatorVariant::normalized);
  const auto dec = eigendecompose(op);
  const WaveConfig wc{15, 0.2};
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      const double fwd = encoder_sensitivity_forward(op, wc, 2, v, u);
      CHECK(std::abs(encoder_sensitivity_fd(op, wc, 2, v, u) - fwd) < 1e-6);
      CHECK(std::abs(encoder_sensitivity_spectral(dec, wc, 2, v, u) - fwd) < 1e-6);
    }
  }
}

TEST_CASE("sensitivity of a trained model") {
  const auto b = synth_distance_task(3, 20, 1);
  const Graph g = bundle_to_graph(b).graph;
  TrainConfig c;
  c.hidden_dim = 6;
  c.num_steps = 8;
  c.step_size = 0.3;
  c.epochs = 10;
  c.activation = Activation::tanh;
  const auto r = train(g, c);
  const auto op = build_operator(g, r.model.variant);
  const int head0 = distance_task_head(0, 3), tail0 = distance_task_tail(0, 3);
  const int head1 = distance_task_head(1, 3);
  CHECK(sensitivity(r.model, op, g.features(), tail0, head1) == 0.0);
  CHECK(sensitivity_analytic(r.model, op, g.features(), tail0, head1) == 0.0);
  const double fd = sensitivity(r.model, op, g.features(), tail0, head0);
  CHECK(fd > 0.0);
  CHECK(relative_error(fd, sensitivity_analytic(r.model, op, g.features(), tail0, head0)) < 1e-5);
  const double self = sensitivity(r.model, op, g.features(), tail0, tail0);
  CHECK(self > 0.0);
  CHECK(relative_error(self, sensitivity_analytic(r.model, op, g.features(), tail0, tail0)) < 1e-5);
  CHECK_THROWS_AS(sensitivity(r.model, op, g.features(), -1, 0), Error);
}

TEST_CASE("sensitivity of a linear pipeline matches the closed form") {
  std::mt19937_64 rng(10);
  const int n = 5, d0 = 3;
  GraphInput in;
  in.num_nodes = n;
  in.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  in.features = random_matrix(n, d0, rng);
  const Graph g = build_graph(in).graph;
  TrainConfig c;
  c.architecture = Architecture::rnn;
  c.activation = Activation::identity;
  c.hidden_dim = 4;
  c.num_steps = 7;
  c.step_size = 0.25;
  Model m = make_model(c, d0, 2);
  m.params.tensors.layers[0].recurrent.setZero();
  const auto op = build_operator(g, m.variant);
  // y_v = V U E (P_N x)_v + const, with P_N the encoder's step-N matrix.
  NodeMatrix eye = NodeMatrix::Identity(n, n);
  const NodeMatrix pn = propagate(op, eye, c.wave()).positions.back();
  const Eigen::MatrixXd vue =
      m.params.tensors.head_weight * m.params.tensors.layers[0].input * m.params.tensors.embedding_weight;
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u) {
      const double closed = std::abs(pn(v, u)) * vue.norm();
      CHECK(std::abs(sensitivity(m, op, g.features(), v, u) - closed) < 1e-6);
    }
  }
}

TEST_CASE("fit_exponential_decay") {
  std::vector<double> x, y;
  for (int i = 0; i < 6; ++i) {
    x.push_back(10.0 * i);
    y.push_back(3.0 * std::exp(-0.05 * 10.0 * i));
  }
  const auto f = fit_exponential_decay(x, y);
  CHECK(f.rate == doctest::Approx(0.05));
  CHECK(f.log_scale == doctest::Approx(std::log(3.0)));
  CHECK(f.r_squared == doctest::Approx(1.0));
  y[2] = 0.0;
  CHECK_THROWS_AS(fit_exponential_decay(x, y), Error);
}

TEST_CASE("convergence_study on P3") {
  const auto op = lap(3, path_edges(3));
  const auto r = convergence_study(op, col({1, 0, -1}), 0.04, 4.0, 3);
  REQUIRE(r.levels.size() == 3);
  CHECK(r.finite);
  CHECK(r.order >= 0.8);
  CHECK(r.order <= 1.3);
  CHECK(r.levels[1].num_steps == 200);
}

TEST_CASE("sweep_steps: single entry and fixed stop time") {
  const Graph g = bundle_to_graph(synth_sbm(60, 2, 0.15, 0.01, 0.5, 2)).graph;
  TrainConfig c;
  c.hidden_dim = 6;
  c.num_steps = 10;
  c.step_size = 0.2;
  c.epochs = 10;
  const auto one = sweep_steps(g, c, {10}, {0});
  REQUIRE(one.entries.size() == 1);
  CHECK(one.entries[0].std_metric == 0.0);
  CHECK(one.fixed_stop_time);
  const auto two = sweep_steps(g, c, {4, 8}, {0, 1});
  REQUIRE(two.entries.size() == 2);
  CHECK(two.entries[0].stop_time == doctest::Approx(2.0));
  CHECK(two.entries[1].step_size == doctest::Approx(0.25));
  CHECK(two.entries[1].seeds == std::vector<std::uint64_t>{0, 1});
  CHECK(two.to_csv().find("num_steps") == 0);
  // Results do not depend on the worker count.
  const auto again = sweep_steps(g, c, {4, 8}, {0, 1});
  CHECK(again.to_json() == two.to_json());
}

TEST_CASE("wav: silence, header, round-trip") {
  const auto p2 = lap(2, {{0, 1}});
  WavOptions o;
  o.sample_rate = 8000;
  o.duration = 0.5;
  const auto silent = synthesize_audio(p2, NodeMatrix::Zero(2, 1), 0, o);
  CHECK(silent.samples.size() == 4000);
  CHECK(silent.silent);
  const auto bytes = encode_wav(silent.samples, 8000);
  CHECK(bytes.size() == 44 + 8000);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "RIFF");
  CHECK(std::string(bytes.begin() + 8, bytes.begin() + 12) == "WAVE");
  const auto tone = synthesize_audio(p2, col({1, 0}), 0, o);
  const auto dec = decode_wav(encode_wav(tone.samples, 8000));
  CHECK(dec.sample_rate == 8000);
  CHECK(dec.channels == 1);
  CHECK(dec.bits_per_sample == 16);
  REQUIRE(dec.samples.size() == tone.samples.size());
  for (std::size_t i = 0; i < tone.samples.size(); ++i) {
    CHECK(dec.samples[i] == static_cast<std::int16_t>(std::lround(tone.samples[i] * 32767.0)));
  }
  double peak = 0.0;
  for (double s : tone.samples) peak = std::max(peak, std::abs(s));
  CHECK(peak == doctest::Approx(0.9));
  CHECK_THROWS_AS(synthesize_audio(p2, col({1, 0}), 0, WavOptions{8000, 0.0}), Error);
  CHECK_THROWS_AS(synthesize_audio(p2, col({1, 0}), 5, o), Error);
}

TEST_CASE("wav: P2 tone sits at the mapped sqrt(2) frequency") {
  const auto p2 = lap(2, {{0, 1}});
  WavOptions o;
  o.sample_rate = 8000;
  o.duration = 1.0;
  o.target_frequency_hz = 440.0;
  const auto a = synthesize_audio(p2, col({1, 0}), 0, o);
  CHECK(a.route == "oracle");
  const double expect = std::sqrt(2.0) * a.time_scale / (2.0 * std::numbers::pi);
  CHECK(expect == doctest::Approx(440.0));
  CHECK(std::abs(dominant_bin(a.samples, 1000) - expect) <= 1.0);

  // Past the oracle limit the encoder route is taken with a notice.
  o.oracle_limit = 1;
  const auto e = synthesize_audio(p2, col({1, 0}), 0, o);
  CHECK(e.route == "encoder");
  CHECK_FALSE(e.notices.empty());
  // The discrete scheme rotates each mode by 2 asin(h w / 2) per step.
  const double h = a.time_scale / o.sample_rate;
  const double discrete = 2.0 * std::asin(h * std::sqrt(2.0) / 2.0) * o.sample_rate / (2.0 * std::numbers::pi);
  CHECK(std::abs(dominant_bin(e.samples, 1000) - discrete) <= 1.0);
}
