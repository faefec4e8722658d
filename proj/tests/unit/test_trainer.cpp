#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "../support/fixtures.hpp"
#include "glaudio/adam.hpp"
#include "glaudio/config.hpp"
#include "glaudio/data_io.hpp"
#include "glaudio/error.hpp"
#include "glaudio/losses.hpp"
#include "glaudio/trainer.hpp"

using namespace glaudio;
using namespace glaudio::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

Graph sbm_graph(std::uint64_t seed = 1) { return bundle_to_graph(synth_sbm(100, 2, 0.1, 0.01, 0.5, seed)).graph; }

TrainConfig small_config() {
  TrainConfig c;
  c.hidden_dim = 8;
  c.num_steps = 6;
  c.step_size = 0.2;
  c.epochs = 30;
  c.learning_rate = 0.01;
  c.schedule = Schedule::constant;
  return c;
}

}  // namespace

TEST_CASE("masked_cross_entropy") {
  const NodeMatrix uniform = NodeMatrix::Zero(1, 7);
  CHECK(masked_cross_entropy(uniform, {3}, {true}).loss == doctest::Approx(std::log(7.0)).epsilon(1e-12));

  NodeMatrix sat = NodeMatrix::Zero(1, 3);
  sat(0, 1) = 50.0;
  CHECK(masked_cross_entropy(sat, {1}, {true}).loss < 1e-9);

  std::mt19937_64 rng(1);
  const NodeMatrix logits = random_matrix(3, 4, rng);
  const std::vector<int> labels{2, 0, 3};
  const double a = masked_cross_entropy(logits.row(0), {2}, {true}).loss;
  const double b = masked_cross_entropy(logits.row(2), {3}, {true}).loss;
  const auto both = masked_cross_entropy(logits, labels, {true, false, true});
  CHECK(both.loss == doctest::Approx((a + b) / 2).epsilon(1e-14));
  CHECK(both.grad.row(1).isZero(0.0));

  NodeMatrix w = logits;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double keep = w.data()[i];
    w.data()[i] = keep + 1e-6;
    const double up = masked_cross_entropy(w, labels, {true, false, true}).loss;
    w.data()[i] = keep - 1e-6;
    const double down = masked_cross_entropy(w, labels, {true, false, true}).loss;
    w.data()[i] = keep;
    CHECK(std::abs((up - down) / 2e-6 - both.grad.data()[i]) < 1e-8);
  }
  CHECK(code_of([&] { masked_cross_entropy(logits, labels, {false, false, false}); }) == ErrorCode::EmptyMask);
  CHECK(code_of([&] { masked_cross_entropy(logits, {2, 0, 4}, {true, true, true}); }) == ErrorCode::LabelOutOfRange);
}

TEST_CASE("l1_loss") {
  NodeMatrix p(2, 1), t(2, 1);
  p << 1, -3;
  t << 0, 0;
  const auto r = l1_loss(p, t, {true, true});
  CHECK(r.loss == 2.0);
  CHECK(r.grad(0, 0) == 0.5);
  CHECK(r.grad(1, 0) == -0.5);
  const auto z = l1_loss(p, p, {true, true});
  CHECK(z.loss == 0.0);
  CHECK(z.grad.isZero(0.0));
  CHECK(code_of([&] { l1_loss(p, t, {false, false}); }) == ErrorCode::EmptyMask);
}

TEST_CASE("accuracy and evaluate examples") {
  NodeMatrix logits(3, 2);
  logits << 1, 0, 0, 1, 1, 0;
  CHECK(accuracy(logits, {0, 1, 1}, {true, true, true}) == doctest::Approx(2.0 / 3.0));
  CHECK(accuracy(logits, {0, 1, 0}, {true, true, true}) == 1.0);
  NodeMatrix tie = NodeMatrix::Zero(4, 2);
  CHECK(accuracy(tie, {0, 1, 0, 1}, {true, true, true, true}) == 0.5);
  CHECK(code_of([&] { accuracy(logits, {0, 1, 1}, {false, false, false}); }) == ErrorCode::EmptyMask);
}

TEST_CASE("adam_step examples") {
  std::vector<double> p{1.0, -2.0, 0.5};
  const std::vector<double> zero(3, 0.0);
  AdamState st;
  AdamOptions o;
  adam_step({std::span<double>(p)}, {std::span<const double>(zero)}, st, o);
  CHECK(p == std::vector<double>{1.0, -2.0, 0.5});
  CHECK(st.step == 1);

  std::vector<double> q{0.3, 0.3, 0.3, 0.3};
  const std::vector<double> g{0.5, -2.0, 1e-2, -7.0};
  AdamState s2;
  o.learning_rate = 0.05;
  adam_step({std::span<double>(q)}, {std::span<const double>(g)}, s2, o);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(q[i] - (0.3 - 0.05 * (g[i] > 0 ? 1 : -1))) < 1e-6);

  std::vector<double> r{2.0, -4.0};
  AdamState s3;
  adam_step({std::span<double>(r)}, {std::span<const double>(std::vector<double>{0.0, 0.0})}, s3,
            AdamOptions{0.01, 0.9, 0.999, 1e-8, 0.1});
  CHECK(r[0] == doctest::Approx(2.0 * 0.999).epsilon(1e-15));
  CHECK(r[1] == doctest::Approx(-4.0 * 0.999).epsilon(1e-15));

  std::vector<double> bad(2, 0.0);
  CHECK(code_of([&] { adam_step({std::span<double>(p)}, {std::span<const double>(bad)}, st, o); }) ==
        ErrorCode::ShapeMismatch);
}

TEST_CASE("config: strict parsing, overrides, validation, hash") {
  const TrainConfig d;
  CHECK(TrainConfig::from_json(d.to_json()).to_json() == d.to_json());
  CHECK(code_of([] { TrainConfig::from_json(Json::parse(R"({"model":{"hiden_dim":3}})")); }) ==
        ErrorCode::InvalidConfig);
  CHECK(code_of([] { TrainConfig::from_json(Json::parse(R"({"model":{"hidden_dim":"big"}})")); }) ==
        ErrorCode::InvalidConfig);
  const Json j = apply_overrides(d.to_json(), {"encoder.num_steps=25", "model.activation=relu"});
  const auto c = TrainConfig::from_json(j);
  CHECK(c.num_steps == 25);
  CHECK(c.activation == Activation::relu);
  CHECK(code_of([&] { TrainConfig::from_json(apply_overrides(d.to_json(), {"encoder.steps=3"})); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { TrainConfig::from_json(apply_overrides(d.to_json(), {"encoder.num_steps=abc"})); }) ==
        ErrorCode::InvalidConfig);

  TrainConfig bad;
  bad.num_steps = 0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidConfig);
  bad = TrainConfig{};
  bad.learning_rate = -1;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidConfig);
  bad = TrainConfig{};
  bad.dropout = 1.0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidConfig);

  CHECK(d.hash() == TrainConfig{}.hash());
  CHECK(d.hash().size() == 16);
  CHECK(c.hash() != d.hash());
  CHECK(d.schedule == Schedule::reduce_on_plateau);
  CHECK(d.plateau_factor == 0.5);
  CHECK(d.plateau_patience == 10);
  CHECK(d.min_lr == 1e-5);
  CHECK(d.epochs == 300);
}

TEST_CASE("train rejects N = 0") {
  TrainConfig c = small_config();
  c.num_steps = 0;
  CHECK(code_of([&] { train(sbm_graph(), c); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("train: homophilic SBM reaches 0.9 within 100 epochs") {
  const Graph g = sbm_graph();
  TrainConfig c = small_config();
  c.epochs = 100;
  c.hidden_dim = 16;
  const auto r = train(g, c);
  CHECK(r.report.test_metric >= 0.9);
  CHECK(r.report.epochs.size() == 100);
  CHECK(r.report.metric_name == "accuracy");
  const Json j = r.report.to_json();
  CHECK(j.contains("test_accuracy"));
  CHECK_FALSE(j.contains("wall_clock_seconds"));
}

TEST_CASE("train: seed determinism") {
  const Graph g = sbm_graph(3);
  TrainConfig c = small_config();
  c.dropout = 0.3;
  c.seed = 5;
  CHECK(train(g, c).report.to_json() == train(g, c).report.to_json());
  TrainConfig other = c;
  other.seed = 6;
  CHECK(train(g, other).report.to_json() != train(g, c).report.to_json());
}

TEST_CASE("train: cached signal equals recomputation bitwise") {
  const Graph g = sbm_graph(4);
  for (auto placement : {EmbeddingPlacement::pre_propagation, EmbeddingPlacement::post_propagation}) {
    TrainConfig c = small_config();
    c.placement = placement;
    c.train_embedding = placement == EmbeddingPlacement::post_propagation;
    c.dropout = 0.2;
    c.cache_signal = true;
    const auto a = train(g, c);
    c.cache_signal = false;
    const auto b = train(g, c);
    Json ja = a.report.to_json(), jb = b.report.to_json();
    ja.erase("config_hash");
    jb.erase("config_hash");
    CHECK(ja == jb);
    CHECK(a.model.params.tensors.flatten() == b.model.params.tensors.flatten());
  }
}

TEST_CASE("train: loss decreases at a small learning rate") {
  const Graph g = sbm_graph(6);
  TrainConfig c = small_config();
  c.learning_rate = 1e-4;
  c.epochs = 50;
  const auto r = train(g, c);
  CHECK(r.report.epochs.back().train_loss < r.report.epochs.front().train_loss);
}

TEST_CASE("train: early stopping and plateau schedule") {
  const Graph g = sbm_graph(7);
  TrainConfig c = small_config();
  c.epochs = 200;
  c.early_stopping_patience = 5;
  c.learning_rate = 0.05;
  c.schedule = Schedule::reduce_on_plateau;
  c.plateau_patience = 1;
  const auto r = train(g, c);
  CHECK(r.report.stopped_early);
  CHECK(r.report.epochs.size() < 200);
  CHECK(r.report.epochs.back().learning_rate < 0.05);
}

TEST_CASE("train: minibatches and l1 regression") {
  Graph g = sbm_graph(8);
  TrainConfig c = small_config();
  c.batch_size = 16;
  c.epochs = 20;
  CHECK(train(g, c).report.epochs.size() == 20);

  GraphBundle b = synth_sbm(60, 2, 0.15, 0.02, 0.3, 9);
  b.targets = NodeMatrix(60, 1);
  for (int v = 0; v < 60; ++v) b.targets(v, 0) = b.labels[v] == 0 ? -1.0 : 1.0;
  const Graph rg = bundle_to_graph(b).graph;
  TrainConfig rc = small_config();
  rc.loss = LossKind::l1;
  rc.epochs = 60;
  const auto r = train(rg, rc);
  CHECK(r.report.metric_name == "mae");
  CHECK(r.report.to_json().contains("test_mae"));
  CHECK(r.report.test_metric < 0.9);
}

TEST_CASE("end-to-end gradient matches central differences") {
  std::mt19937_64 rng(31);
  GraphInput in;
  in.num_nodes = 5;
  in.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 3}};
  in.features = random_matrix(5, 3, rng);
  in.labels = {0, 1, 2, 1, 0};
  in.masks.train = {true, true, false, true, true};
  const Graph g = build_graph(in).graph;
  for (auto arch : {Architecture::rnn, Architecture::lstm, Architecture::cornn}) {
    for (auto placement : {EmbeddingPlacement::pre_propagation, EmbeddingPlacement::post_propagation}) {
      CAPTURE(to_string(arch));
      CAPTURE(to_string(placement));
      TrainConfig c;
      c.architecture = arch;
      c.placement = placement;
      c.hidden_dim = 4;
      c.num_layers = 2;
      c.num_steps = 8;
      c.step_size = 0.3;
      c.activation = Activation::tanh;
      c.embedding_activation = Activation::tanh;
      c.seed = 3;
      Model m = make_model(c, 3, 3);
      const auto op = build_operator(g, m.variant);
      const std::vector<int> verts{0, 1, 3, 4};
      std::vector<int> labels;
      for (int v : verts) labels.push_back(g.labels()[v]);
      const std::vector<bool> all(verts.size(), true);
      auto loss_of = [&](const Model& mm) {
        const auto f = pipeline_forward(mm, op, g.features(), verts);
        return masked_cross_entropy(NodeMatrix(f.decoded.outputs.transpose()), labels, all);
      };
      const auto f = pipeline_forward(m, op, g.features(), verts);
      const auto l = masked_cross_entropy(NodeMatrix(f.decoded.outputs.transpose()), labels, all);
      const auto grad = pipeline_backward(m, op, g.features(), f, Eigen::MatrixXd(l.grad.transpose()), true);
      std::vector<double> theta = m.params.tensors.flatten();
      Model work = m;
      CHECK(max_fd_error(theta, grad.grads.flatten(), [&] {
              work.params.tensors.assign_flat(theta);
              return loss_of(work).loss;
            }) < 1e-3);
      // Feature gradient through the encoder adjoint.
      NodeMatrix x = g.features();
      double worst = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x.data()[i];
        x.data()[i] = keep + 1e-5;
        const double up = masked_cross_entropy(
            NodeMatrix(pipeline_forward(m, op, x, verts).decoded.outputs.transpose()), labels, all).loss;
        x.data()[i] = keep - 1e-5;
        const double down = masked_cross_entropy(
            NodeMatrix(pipeline_forward(m, op, x, verts).decoded.outputs.transpose()), labels, all).loss;
        x.data()[i] = keep;
        worst = std::max(worst, relative_error((up - down) / 2e-5, grad.feature_grad.data()[i]));
      }
      CHECK(worst < 1e-3);
    }
  }
}

TEST_CASE("checkpoint round-trip preserves predictions") {
  const Graph g = sbm_graph(10);
  TrainConfig c = small_config();
  c.architecture = Architecture::lstm;
  c.num_layers = 2;
  c.epochs = 5;
  const auto r = train(g, c);
  const auto path = std::filesystem::temp_directory_path() / "glaudio_ckpt_test.json";
  save_checkpoint(r.model, path.string());
  const Model m = load_checkpoint(path.string());
  std::filesystem::remove(path);
  CHECK(m.params.tensors.flatten() == r.model.params.tensors.flatten());
  const auto op = build_operator(g, m.variant);
  std::vector<int> verts(100);
  std::iota(verts.begin(), verts.end(), 0);
  CHECK(predict(m, op, g.features(), verts) == predict(r.model, op, g.features(), verts));

  Json j = checkpoint_to_json(m);
  j["format_version"] = "9";
  CHECK(code_of([&] { checkpoint_from_json(j); }) == ErrorCode::VersionMismatch);
}
