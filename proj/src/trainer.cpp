#include "glaudio/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "glaudio/adam.hpp"
#include "glaudio/error.hpp"
#include "glaudio/losses.hpp"

namespace glaudio {

namespace {

constexpr Eigen::Index kDecodeChunk = 512;

bool is_pre(const Model& m) { return m.params.placement == EmbeddingPlacement::pre_propagation; }

std::vector<int> mask_indices(const std::vector<bool>& mask) {
  std::vector<int> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(static_cast<int>(i));
  return out;
}

SequenceBatch gather_columns(const std::vector<Eigen::MatrixXd>& steps, std::span<const int> cols) {
  SequenceBatch out;
  out.reserve(steps.size());
  for (const auto& s : steps) {
    Eigen::MatrixXd m(s.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t b = 0; b < cols.size(); ++b) m.col(static_cast<Eigen::Index>(b)) = s.col(cols[b]);
    out.push_back(std::move(m));
  }
  return out;
}

Eigen::MatrixXd decode_in_chunks(const DecoderParams& params, const std::vector<Eigen::MatrixXd>& steps) {
  const Eigen::Index B = steps.empty() ? 0 : steps.front().cols();
  Eigen::MatrixXd out(params.dims.output_dim, B);
  for (Eigen::Index start = 0; start < B; start += kDecodeChunk) {
    const Eigen::Index len = std::min(kDecodeChunk, B - start);
    SequenceBatch chunk;
    chunk.reserve(steps.size());
    for (const auto& s : steps) chunk.emplace_back(s.middleCols(start, len));
    out.middleCols(start, len) = forward(params, chunk).outputs;
  }
  return out;
}

std::vector<int> subset(const std::vector<int>& values, std::span<const int> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(values[static_cast<std::size_t>(i)]);
  return out;
}

NodeMatrix subset_rows(const NodeMatrix& m, std::span<const int> idx) {
  NodeMatrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t b = 0; b < idx.size(); ++b) out.row(static_cast<Eigen::Index>(b)) = m.row(idx[b]);
  return out;
}

struct BatchLoss {
  double loss = 0.0;
  double metric = 0.0;
  NodeMatrix grad;
};

BatchLoss batch_loss(const Graph& graph, LossKind kind, const Eigen::MatrixXd& outputs, std::span<const int> vertices) {
  const NodeMatrix pred = outputs.transpose();
  const std::vector<bool> all(vertices.size(), true);
  BatchLoss out;
  if (kind == LossKind::cross_entropy) {
    const auto labels = subset(graph.labels(), vertices);
    auto r = masked_cross_entropy(pred, labels, all);
    out.loss = r.loss;
    out.grad = std::move(r.grad);
    out.metric = accuracy(pred, labels, all);
  } else {
    const NodeMatrix target = subset_rows(graph.targets(), vertices);
    auto r = l1_loss(pred, target, all);
    out.loss = r.loss;
    out.grad = std::move(r.grad);
    out.metric = mean_absolute_error(pred, target, all);
  }
  return out;
}

std::vector<std::span<double>> trainable_views(Model& model) {
  auto v = model.params.tensors.views();
  if (!model.train_embedding) v.erase(v.begin(), v.begin() + 2);
  return v;
}

std::vector<std::span<const double>> trainable_grads(const Model& model, const GradientSet& grads) {
  auto v = grads.views();
  if (!model.train_embedding) v.erase(v.begin(), v.begin() + 2);
  return v;
}

}  // namespace

Model make_model(const TrainConfig& config, int input_dim, int output_dim) {
  config.validate();
  DecoderDims dims{input_dim, config.hidden_dim, output_dim, config.num_layers};
  DecoderOptions opts;
  opts.placement = config.placement;
  opts.embedding_activation = config.embedding_activation;
  opts.include_velocity = config.include_velocity;
  opts.cornn = config.cornn;
  Model m;
  m.params = init_params(config.architecture, dims, config.activation, config.seed, opts);
  m.wave = config.wave();
  m.variant = config.variant();
  m.train_embedding = config.train_embedding;
  return m;
}

bool encoder_input_is_fixed(const Model& model) { return !is_pre(model) || !model.train_embedding; }

NodeMatrix encoder_input(const Model& model, const NodeMatrix& features, NodeEmbedding* embedding) {
  if (!is_pre(model)) return features;
  NodeEmbedding emb = embed_nodes(model.params, features);
  NodeMatrix out = emb.output;
  if (embedding != nullptr) *embedding = std::move(emb);
  return out;
}

PipelineForward pipeline_forward(const Model& model, const LaplacianOperator& op, const NodeMatrix& features,
                                 std::span<const int> vertices, const ForwardOptions& options,
                                 const VertexSequences* cached) {
  PipelineForward f;
  f.vertices.assign(vertices.begin(), vertices.end());
  VertexSequences local;
  const VertexSequences* seq = cached;
  if (seq != nullptr) {
    if (!encoder_input_is_fixed(model)) {
      throw Error(ErrorCode::InvalidArgument, "cached sequences require a fixed encoder input");
    }
    if (seq->vertices != f.vertices) throw Error(ErrorCode::DimensionMismatch, "cached sequences cover other vertices");
  } else {
    const NodeMatrix x0 = encoder_input(model, features, is_pre(model) ? &f.embedding : nullptr);
    local = propagate_streaming(op, x0, model.wave, vertices, model.params.include_velocity);
    seq = &local;
  }
  f.decoded = forward(model.params, seq->steps, options);
  return f;
}

PipelineGradient pipeline_backward(const Model& model, const LaplacianOperator& op, const NodeMatrix& features,
                                   const PipelineForward& fwd, const Eigen::MatrixXd& output_grad,
                                   bool want_feature_grad) {
  auto back = backward(model.params, fwd.decoded.tape, output_grad);
  PipelineGradient g;
  g.grads = std::move(back.grads);
  const bool pre = is_pre(model);
  if (!want_feature_grad && !(pre && model.train_embedding)) return g;

  const int width = pre ? model.params.dims.hidden_dim : model.params.dims.input_dim;
  NodeMatrix dx0 = propagate_adjoint(op, model.wave, width, fwd.vertices, back.input_grads,
                                     model.params.include_velocity);
  if (pre) {
    const NodeEmbedding emb = fwd.embedding.pre.size() > 0 ? fwd.embedding : embed_nodes(model.params, features);
    if (model.train_embedding) {
      g.feature_grad = embed_nodes_backward(model.params, features, emb, dx0, g.grads);
    } else {
      GradientSet scratch = g.grads.zeros_like();
      g.feature_grad = embed_nodes_backward(model.params, features, emb, dx0, scratch);
    }
  } else {
    g.feature_grad = std::move(dx0);
  }
  return g;
}

Eigen::MatrixXd predict(const Model& model, const LaplacianOperator& op, const NodeMatrix& features,
                        std::span<const int> vertices) {
  const NodeMatrix x0 = encoder_input(model, features);
  const auto seq = propagate_streaming(op, x0, model.wave, vertices, model.params.include_velocity);
  return decode_in_chunks(model.params, seq.steps);
}

double evaluate(const Model& model, const Graph& graph, const LaplacianOperator& op, const std::vector<bool>& mask,
                Metric metric) {
  const auto vertices = mask_indices(mask);
  if (vertices.empty()) throw Error(ErrorCode::EmptyMask, "evaluation mask selects no vertices");
  const NodeMatrix pred = predict(model, op, graph.features(), vertices).transpose();
  const std::vector<bool> all(vertices.size(), true);
  if (metric == Metric::accuracy) return accuracy(pred, subset(graph.labels(), vertices), all);
  if (!graph.is_regression()) throw Error(ErrorCode::InvalidArgument, "MAE needs regression targets");
  return mean_absolute_error(pred, subset_rows(graph.targets(), vertices), all);
}

Json TrainReport::to_json() const {
  Json j;
  j["metric"] = metric_name;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["split_provenance"] = split_provenance;
  j["epochs_run"] = epochs.size();
  j["best_epoch"] = best_epoch;
  j["best_val_metric"] = best_val_metric;
  j["test_metric"] = std::isfinite(test_metric) ? Json(test_metric) : Json(nullptr);
  j[metric_name == "accuracy" ? "test_accuracy" : "test_mae"] = j["test_metric"];
  j["stopped_early"] = stopped_early;
  j["warnings"] = warnings;
  Json hist = Json::object();
  std::vector<double> tl, tm, vl, vm, lr;
  for (const auto& e : epochs) {
    tl.push_back(e.train_loss);
    tm.push_back(e.train_metric);
    vl.push_back(e.val_loss);
    vm.push_back(e.val_metric);
    lr.push_back(e.learning_rate);
  }
  hist["train_loss"] = tl;
  hist["train_metric"] = tm;
  hist["val_loss"] = vl;
  hist["val_metric"] = vm;
  hist["learning_rate"] = lr;
  j["history"] = hist;
  return j;
}

TrainResult train(const Graph& graph, const TrainConfig& config, const std::string& split_provenance) {
  const auto t_start = std::chrono::steady_clock::now();
  config.validate();
  const bool regression = config.loss == LossKind::l1;
  if (regression && !graph.is_regression()) {
    throw Error(ErrorCode::InvalidConfig, "l1 loss needs regression targets in the graph");
  }
  if (!regression && graph.num_classes() < 1) {
    throw Error(ErrorCode::InvalidConfig, "cross-entropy loss needs class labels in the graph");
  }
  const auto train_v = mask_indices(graph.masks().train);
  const auto val_v = mask_indices(graph.masks().val);
  const auto test_v = mask_indices(graph.masks().test);
  if (train_v.empty()) throw Error(ErrorCode::EmptyMask, "training mask is empty");
  if (val_v.empty()) throw Error(ErrorCode::EmptyMask, "validation mask is empty");

  const auto op = build_operator(graph, config.variant());
  const int out_dim = regression ? static_cast<int>(graph.targets().cols()) : graph.num_classes();
  Model model = make_model(config, graph.feature_dim(), out_dim);
  const NodeMatrix& X = graph.features();

  TrainResult result;
  TrainReport& rep = result.report;
  rep.metric_name = regression ? "mae" : "accuracy";
  rep.seed = config.seed;
  rep.config_hash = config.hash();
  rep.split_provenance = split_provenance;
  rep.warnings = op.warnings;
  const auto stab = check_stability(op, model.wave);
  if (!stab.stable) {
    rep.warnings.push_back("StabilityWarning: h*sqrt(max_eigenvalue_bound) = " + std::to_string(stab.product));
  }

  std::vector<int> eval_v = val_v;
  eval_v.insert(eval_v.end(), test_v.begin(), test_v.end());
  const std::span<const int> val_span(eval_v.data(), val_v.size());
  const std::span<const int> test_span(eval_v.data() + val_v.size(), test_v.size());

  const bool cache = config.cache_signal && encoder_input_is_fixed(model);
  VertexSequences train_cache, eval_cache;
  if (cache) {
    const NodeMatrix x0 = encoder_input(model, X);
    train_cache = propagate_streaming(op, x0, model.wave, train_v, model.params.include_velocity);
    eval_cache = propagate_streaming(op, x0, model.wave, eval_v, model.params.include_velocity);
  }

  std::seed_seq seq{config.seed, std::uint64_t{0x676c6175}};
  std::mt19937_64 rng(seq);
  AdamState adam;
  AdamOptions aopt{config.learning_rate, config.beta1, config.beta2, config.eps, config.weight_decay};
  const bool better_is_higher = !regression;
  double best_metric = better_is_higher ? -std::numeric_limits<double>::infinity()
                                        : std::numeric_limits<double>::infinity();
  double plateau_best = std::numeric_limits<double>::infinity();
  int plateau_bad = 0;
  double stop_best = std::numeric_limits<double>::infinity();
  int stop_bad = 0;
  Model best = model;

  std::vector<int> order(train_v.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = config.batch_size > 0 ? static_cast<std::size_t>(config.batch_size) : order.size();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.batch_size > 0) std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0, metric_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      const std::span<const int> pos(order.data() + start, len);
      std::vector<int> verts;
      verts.reserve(len);
      for (int p : pos) verts.push_back(train_v[static_cast<std::size_t>(p)]);

      const ForwardOptions fopt{config.dropout, &rng};
      PipelineForward fwd;
      if (cache) {
        VertexSequences part;
        part.vertices = verts;
        part.steps = gather_columns(train_cache.steps, pos);
        fwd = pipeline_forward(model, op, X, verts, fopt, &part);
      } else {
        fwd = pipeline_forward(model, op, X, verts, fopt);
      }
      const auto bl = batch_loss(graph, config.loss, fwd.decoded.outputs, verts);
      const auto grad = pipeline_backward(model, op, X, fwd, bl.grad.transpose());
      adam_step(trainable_views(model), trainable_grads(model, grad.grads), adam, aopt);
      loss_sum += bl.loss * static_cast<double>(len);
      metric_sum += bl.metric * static_cast<double>(len);
    }

    const Eigen::MatrixXd eval_out =
        cache ? decode_in_chunks(model.params, eval_cache.steps) : predict(model, op, X, eval_v);
    const auto vl = batch_loss(graph, config.loss, eval_out.leftCols(static_cast<Eigen::Index>(val_v.size())), val_span);
    double test_metric = std::numeric_limits<double>::quiet_NaN();
    if (!test_v.empty()) {
      test_metric = batch_loss(graph, config.loss, eval_out.rightCols(static_cast<Eigen::Index>(test_v.size())),
                               test_span)
                        .metric;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.train_metric = metric_sum / static_cast<double>(order.size());
    rec.val_loss = vl.loss;
    rec.val_metric = vl.metric;
    rec.learning_rate = aopt.learning_rate;
    rep.epochs.push_back(rec);

    const bool improved = better_is_higher ? vl.metric > best_metric : vl.metric < best_metric;
    if (improved) {
      best_metric = vl.metric;
      best = model;
      rep.best_epoch = epoch;
      rep.best_val_metric = vl.metric;
      rep.test_metric = test_metric;
    }

    if (config.schedule == Schedule::reduce_on_plateau) {
      if (vl.loss < plateau_best * (1.0 - 1e-4)) {
        plateau_best = vl.loss;
        plateau_bad = 0;
      } else if (++plateau_bad > config.plateau_patience) {
        aopt.learning_rate = std::max(aopt.learning_rate * config.plateau_factor, config.min_lr);
        plateau_bad = 0;
      }
    }
    if (config.early_stopping_patience > 0) {
      if (vl.loss < stop_best * (1.0 - 1e-4)) {
        stop_best = vl.loss;
        stop_bad = 0;
      } else if (++stop_bad >= config.early_stopping_patience) {
        rep.stopped_early = true;
        break;
      }
    }
  }

  result.model = std::move(best);
  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

Json checkpoint_to_json(const Model& model) {
  const auto& p = model.params;
  Json j;
  j["format"] = "glaudio-checkpoint";
  j["format_version"] = "1";
  j["architecture"] = to_string(p.architecture);
  j["activation"] = to_string(p.activation);
  j["embedding_activation"] = to_string(p.embedding_activation);
  j["embedding_placement"] = to_string(p.placement);
  j["include_velocity"] = p.include_velocity;
  j["cornn"] = {{"gamma", p.cornn.gamma}, {"epsilon", p.cornn.epsilon}, {"dt", p.cornn.dt}};
  j["dims"] = {{"input_dim", p.dims.input_dim},
               {"hidden_dim", p.dims.hidden_dim},
               {"output_dim", p.dims.output_dim},
               {"num_layers", p.dims.num_layers}};
  j["seed"] = p.seed;
  j["encoder"] = {{"num_steps", model.wave.num_steps},
                  {"step_size", model.wave.step_size},
                  {"operator", to_string(model.variant)}};
  j["train_embedding"] = model.train_embedding;
  Json tensors = Json::array();
  const auto names = p.tensors.names();
  const auto views = p.tensors.views();
  for (std::size_t i = 0; i < names.size(); ++i) tensors.push_back({{"name", names[i]}, {"size", views[i].size()}});
  j["tensors"] = tensors;
  j["parameters"] = p.tensors.flatten();
  return j;
}

Model checkpoint_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != "glaudio-checkpoint") {
      throw Error(ErrorCode::ParseError, "not a glaudio checkpoint");
    }
    if (j.at("format_version").get<std::string>() != "1") {
      throw Error(ErrorCode::VersionMismatch, "checkpoint format_version " + j.at("format_version").dump());
    }
    const auto& d = j.at("dims");
    DecoderDims dims{d.at("input_dim").get<int>(), d.at("hidden_dim").get<int>(), d.at("output_dim").get<int>(),
                     d.at("num_layers").get<int>()};
    DecoderOptions opts;
    opts.placement = placement_from_string(j.at("embedding_placement").get<std::string>());
    opts.embedding_activation = activation_from_string(j.at("embedding_activation").get<std::string>());
    opts.include_velocity = j.at("include_velocity").get<bool>();
    opts.cornn = {j.at("cornn").at("gamma").get<double>(), j.at("cornn").at("epsilon").get<double>(),
                  j.at("cornn").at("dt").get<double>()};
    Model m;
    m.params = init_params(architecture_from_string(j.at("architecture").get<std::string>()), dims,
                           activation_from_string(j.at("activation").get<std::string>()),
                           j.at("seed").get<std::uint64_t>(), opts);
    const auto flat = j.at("parameters").get<std::vector<double>>();
    if (flat.size() != m.params.tensors.size()) {
      throw Error(ErrorCode::ShapeMismatch, "checkpoint has " + std::to_string(flat.size()) + " parameters, dims imply " +
                                                std::to_string(m.params.tensors.size()));
    }
    m.params.tensors.assign_flat(flat);
    const auto& e = j.at("encoder");
    m.wave = WaveConfig{e.at("num_steps").get<int>(), e.at("step_size").get<double>()};
    m.wave.validate();
    m.variant = operator_variant_from_string(e.at("operator").get<std::string>());
    m.train_embedding = j.at("train_embedding").get<bool>();
    return m;
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("checkpoint: ") + ex.what());
  }
}

void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << checkpoint_to_json(model).dump(1) << '\n';
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& ex) {
    throw Error(ErrorCode::ParseError, path + ": " + ex.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace glaudio
