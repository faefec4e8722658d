#include "glaudio/decoder.hpp"

#include <cmath>
#include <numbers>

#include "glaudio/error.hpp"

namespace glaudio {

const char* to_string(Architecture a) noexcept {
  switch (a) {
    case Architecture::rnn: return "rnn";
    case Architecture::lstm: return "lstm";
    case Architecture::cornn: return "cornn";
  }
  return "unknown";
}

const char* to_string(Activation a) noexcept {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh: return "tanh";
    case Activation::gelu: return "gelu";
  }
  return "unknown";
}

const char* to_string(EmbeddingPlacement p) noexcept {
  return p == EmbeddingPlacement::pre_propagation ? "pre" : "post";
}

Architecture architecture_from_string(const std::string& s) {
  for (auto a : {Architecture::rnn, Architecture::lstm, Architecture::cornn})
    if (s == to_string(a)) return a;
  throw Error(ErrorCode::InvalidConfig, "unknown decoder architecture '" + s + "'");
}

Activation activation_from_string(const std::string& s) {
  for (auto a : {Activation::identity, Activation::relu, Activation::leaky_relu, Activation::tanh, Activation::gelu})
    if (s == to_string(a)) return a;
  throw Error(ErrorCode::InvalidConfig, "unknown activation '" + s + "'");
}

EmbeddingPlacement placement_from_string(const std::string& s) {
  if (s == "pre") return EmbeddingPlacement::pre_propagation;
  if (s == "post") return EmbeddingPlacement::post_propagation;
  throw Error(ErrorCode::InvalidConfig, "embedding placement must be 'pre' or 'post', got '" + s + "'");
}

double activate(Activation a, double x) noexcept {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::leaky_relu: return x > 0.0 ? x : 0.01 * x;
    case Activation::tanh: return std::tanh(x);
    case Activation::gelu: return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
  }
  return x;
}

double activate_grad(Activation a, double x) noexcept {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::leaky_relu: return x > 0.0 ? 1.0 : 0.01;
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::gelu: {
      const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
      const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
      return cdf + x * pdf;
    }
  }
  return 1.0;
}

namespace {

Eigen::MatrixXd apply_act(Activation a, const Eigen::MatrixXd& m) {
  return m.unaryExpr([a](double x) { return activate(a, x); });
}

Eigen::MatrixXd apply_act_grad(Activation a, const Eigen::MatrixXd& m) {
  return m.unaryExpr([a](double x) { return activate_grad(a, x); });
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <typename Tensors, typename Fn>
void visit_tensors(Tensors& t, Fn&& fn) {
  fn("embedding.weight", t.embedding_weight);
  fn("embedding.bias", t.embedding_bias);
  for (std::size_t l = 0; l < t.layers.size(); ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    fn(p + "recurrent", t.layers[l].recurrent);
    fn(p + "recurrent_z", t.layers[l].recurrent_z);
    fn(p + "input", t.layers[l].input);
    fn(p + "bias", t.layers[l].bias);
  }
  fn("head.weight", t.head_weight);
  fn("head.bias", t.head_bias);
}

}  // namespace

ParameterTensors ParameterTensors::zeros_like() const {
  ParameterTensors z = *this;
  visit_tensors(z, [](const std::string&, auto& m) { m.setZero(); });
  return z;
}

std::size_t ParameterTensors::size() const {
  std::size_t n = 0;
  visit_tensors(*this, [&](const std::string&, const auto& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

std::vector<std::span<double>> ParameterTensors::views() {
  std::vector<std::span<double>> out;
  visit_tensors(*this, [&](const std::string&, auto& m) {
    if (m.size() > 0) out.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
  });
  return out;
}

std::vector<std::span<const double>> ParameterTensors::views() const {
  std::vector<std::span<const double>> out;
  visit_tensors(*this, [&](const std::string&, const auto& m) {
    if (m.size() > 0) out.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
  });
  return out;
}

std::vector<std::string> ParameterTensors::names() const {
  std::vector<std::string> out;
  visit_tensors(*this, [&](const std::string& name, const auto& m) {
    if (m.size() > 0) out.push_back(name);
  });
  return out;
}

std::vector<double> ParameterTensors::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  for (auto v : views()) flat.insert(flat.end(), v.begin(), v.end());
  return flat;
}

void ParameterTensors::assign_flat(std::span<const double> flat) {
  if (flat.size() != size()) throw Error(ErrorCode::ShapeMismatch, "flat parameter length");
  std::size_t off = 0;
  for (auto v : views()) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
              flat.begin() + static_cast<std::ptrdiff_t>(off + v.size()), v.begin());
    off += v.size();
  }
}

bool ParameterTensors::same_shape(const ParameterTensors& other) const {
  if (layers.size() != other.layers.size()) return false;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> a, b;
  visit_tensors(*this, [&](const std::string&, const auto& m) { a.emplace_back(m.rows(), m.cols()); });
  visit_tensors(other, [&](const std::string&, const auto& m) { b.emplace_back(m.rows(), m.cols()); });
  return a == b;
}

int DecoderParams::sequence_width() const {
  const int ch = include_velocity ? 2 : 1;
  return placement == EmbeddingPlacement::post_propagation ? ch * dims.input_dim : ch * dims.hidden_dim;
}

int DecoderParams::first_layer_width() const {
  const int ch = include_velocity ? 2 : 1;
  return placement == EmbeddingPlacement::post_propagation ? dims.hidden_dim : ch * dims.hidden_dim;
}

int DecoderParams::embedding_input_width() const {
  const int ch = include_velocity ? 2 : 1;
  return placement == EmbeddingPlacement::post_propagation ? ch * dims.input_dim : dims.input_dim;
}

namespace {

void check_dims(const DecoderDims& d) {
  if (d.input_dim < 1 || d.hidden_dim < 1 || d.output_dim < 1 || d.num_layers < 1) {
    throw Error(ErrorCode::BadDimensions, "decoder dimensions must be positive (d0=" + std::to_string(d.input_dim) +
                                              ", q=" + std::to_string(d.hidden_dim) +
                                              ", d1=" + std::to_string(d.output_dim) +
                                              ", L=" + std::to_string(d.num_layers) + ")");
  }
}

int gate_rows(Architecture a, int q) { return a == Architecture::lstm ? 4 * q : q; }

}  // namespace

void DecoderParams::validate() const {
  check_dims(dims);
  const int q = dims.hidden_dim;
  const auto& t = tensors;
  auto expect = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::BadDimensions, what);
  };
  expect(t.embedding_weight.rows() == q && t.embedding_weight.cols() == embedding_input_width(), "embedding weight");
  expect(t.embedding_bias.size() == q, "embedding bias");
  expect(static_cast<int>(t.layers.size()) == dims.num_layers, "layer count");
  const int g = gate_rows(architecture, q);
  for (std::size_t l = 0; l < t.layers.size(); ++l) {
    const auto& layer = t.layers[l];
    const int in = l == 0 ? first_layer_width() : q;
    expect(layer.recurrent.rows() == g && layer.recurrent.cols() == q, "recurrent weight");
    expect(layer.input.rows() == g && layer.input.cols() == in, "input weight");
    expect(layer.bias.size() == g, "layer bias");
    if (architecture == Architecture::cornn) {
      expect(layer.recurrent_z.rows() == q && layer.recurrent_z.cols() == q, "cornn W~");
    } else {
      expect(layer.recurrent_z.size() == 0, "recurrent_z only exists for cornn");
    }
  }
  expect(t.head_weight.rows() == dims.output_dim && t.head_weight.cols() == q, "head weight");
  expect(t.head_bias.size() == dims.output_dim, "head bias");
  for (auto v : t.views())
    for (double x : v)
      if (!std::isfinite(x)) throw Error(ErrorCode::BadDimensions, "non-finite parameter");
}

std::size_t parameter_count(Architecture arch, const DecoderDims& d) {
  check_dims(d);
  const std::size_t q = static_cast<std::size_t>(d.hidden_dim);
  const std::size_t g = static_cast<std::size_t>(gate_rows(arch, d.hidden_dim));
  std::size_t n = q * static_cast<std::size_t>(d.input_dim) + q;
  for (int l = 0; l < d.num_layers; ++l) {
    n += g * q + g * q + g;
    if (arch == Architecture::cornn) n += q * q;
  }
  n += static_cast<std::size_t>(d.output_dim) * q + static_cast<std::size_t>(d.output_dim);
  return n;
}

DecoderParams init_params(Architecture arch, const DecoderDims& dims, Activation activation, std::uint64_t seed,
                          const DecoderOptions& options) {
  check_dims(dims);
  DecoderParams p;
  p.architecture = arch;
  p.activation = activation;
  p.embedding_activation = options.embedding_activation;
  p.placement = options.placement;
  p.include_velocity = options.include_velocity;
  p.cornn = options.cornn;
  p.dims = dims;
  p.seed = seed;

  std::mt19937_64 rng(seed);
  auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Eigen::MatrixXd m(rows, cols);
    // Column-major fill keeps the draw order tied to storage order.
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
    return m;
  };

  const int q = dims.hidden_dim;
  const int g = gate_rows(arch, q);
  auto& t = p.tensors;
  t.embedding_weight = glorot(q, p.embedding_input_width());
  t.embedding_bias = Eigen::VectorXd::Zero(q);
  for (int l = 0; l < dims.num_layers; ++l) {
    RecurrentLayer layer;
    const int in = l == 0 ? p.first_layer_width() : q;
    layer.recurrent = glorot(g, q);
    if (arch == Architecture::cornn) layer.recurrent_z = glorot(q, q);
    layer.input = glorot(g, in);
    layer.bias = Eigen::VectorXd::Zero(g);
    if (arch == Architecture::lstm) layer.bias.segment(q, q).setConstant(1.0);
    t.layers.push_back(std::move(layer));
  }
  t.head_weight = glorot(dims.output_dim, q);
  t.head_bias = Eigen::VectorXd::Zero(dims.output_dim);
  return p;
}

SequenceBatch to_batch(const NodeMatrix& sequence) {
  SequenceBatch batch;
  batch.reserve(static_cast<std::size_t>(sequence.rows()));
  for (Eigen::Index t = 0; t < sequence.rows(); ++t) batch.emplace_back(sequence.row(t).transpose());
  return batch;
}

namespace {

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng) < rate ? 0.0 : keep_scale;
  return m;
}

void run_layer(const DecoderParams& params, const RecurrentLayer& layer, LayerTape& lt, Eigen::Index B) {
  const int q = params.dims.hidden_dim;
  const auto N = lt.inputs.size();
  lt.states.assign(1, Eigen::MatrixXd::Zero(q, B));
  lt.pre.clear();
  lt.aux.clear();
  switch (params.architecture) {
    case Architecture::rnn: {
      for (std::size_t t = 0; t < N; ++t) {
        Eigen::MatrixXd a = layer.recurrent * lt.states.back() + layer.input * lt.inputs[t];
        a.colwise() += layer.bias;
        lt.states.push_back(apply_act(params.activation, a));
        lt.pre.push_back(std::move(a));
      }
      break;
    }
    case Architecture::lstm: {
      lt.aux.assign(1, Eigen::MatrixXd::Zero(q, B));
      for (std::size_t t = 0; t < N; ++t) {
        Eigen::MatrixXd z = layer.recurrent * lt.states.back() + layer.input * lt.inputs[t];
        z.colwise() += layer.bias;
        const Eigen::ArrayXXd i = z.topRows(q).array().unaryExpr(&sigmoid);
        const Eigen::ArrayXXd f = z.middleRows(q, q).array().unaryExpr(&sigmoid);
        const Eigen::ArrayXXd g = z.middleRows(2 * q, q).array().tanh();
        const Eigen::ArrayXXd o = z.bottomRows(q).array().unaryExpr(&sigmoid);
        Eigen::MatrixXd c = (f * lt.aux.back().array() + i * g).matrix();
        lt.states.push_back((o * c.array().tanh()).matrix());
        lt.aux.push_back(std::move(c));
        lt.pre.push_back(std::move(z));
      }
      break;
    }
    case Architecture::cornn: {
      const auto& s = params.cornn;
      lt.aux.assign(1, Eigen::MatrixXd::Zero(q, B));
      for (std::size_t t = 0; t < N; ++t) {
        const Eigen::MatrixXd& y = lt.states.back();
        const Eigen::MatrixXd& z = lt.aux.back();
        Eigen::MatrixXd a = layer.recurrent * y + layer.recurrent_z * z + layer.input * lt.inputs[t];
        a.colwise() += layer.bias;
        Eigen::MatrixXd z_next = z + s.dt * (apply_act(params.activation, a) - s.gamma * y - s.epsilon * z);
        Eigen::MatrixXd y_next = y + s.dt * z_next;
        lt.pre.push_back(std::move(a));
        lt.aux.push_back(std::move(z_next));
        lt.states.push_back(std::move(y_next));
      }
      break;
    }
  }
}

// Returns gradients w.r.t. the layer inputs; accumulates parameter grads.
std::vector<Eigen::MatrixXd> backward_layer(const DecoderParams& params, const RecurrentLayer& layer,
                                            const LayerTape& lt, const std::vector<Eigen::MatrixXd>& state_grads,
                                            RecurrentLayer& grad) {
  const int q = params.dims.hidden_dim;
  const auto N = lt.inputs.size();
  const Eigen::Index B = lt.states.front().cols();
  std::vector<Eigen::MatrixXd> input_grads(N);
  Eigen::MatrixXd carry_h = Eigen::MatrixXd::Zero(q, B);
  Eigen::MatrixXd carry_aux = Eigen::MatrixXd::Zero(q, B);

  for (std::size_t k = N; k-- > 0;) {
    const Eigen::MatrixXd dh = state_grads[k] + carry_h;
    switch (params.architecture) {
      case Architecture::rnn: {
        const Eigen::MatrixXd da = dh.cwiseProduct(apply_act_grad(params.activation, lt.pre[k]));
        grad.recurrent.noalias() += da * lt.states[k].transpose();
        grad.input.noalias() += da * lt.inputs[k].transpose();
        grad.bias += da.rowwise().sum();
        carry_h.noalias() = layer.recurrent.transpose() * da;
        input_grads[k].noalias() = layer.input.transpose() * da;
        break;
      }
      case Architecture::lstm: {
        const auto& z = lt.pre[k];
        const Eigen::ArrayXXd i = z.topRows(q).array().unaryExpr(&sigmoid);
        const Eigen::ArrayXXd f = z.middleRows(q, q).array().unaryExpr(&sigmoid);
        const Eigen::ArrayXXd g = z.middleRows(2 * q, q).array().tanh();
        const Eigen::ArrayXXd o = z.bottomRows(q).array().unaryExpr(&sigmoid);
        const Eigen::ArrayXXd tc = lt.aux[k + 1].array().tanh();
        const Eigen::ArrayXXd dh_a = dh.array();
        const Eigen::ArrayXXd dc = carry_aux.array() + dh_a * o * (1.0 - tc * tc);
        Eigen::MatrixXd dz(4 * q, B);
        dz.topRows(q) = (dc * g * i * (1.0 - i)).matrix();
        dz.middleRows(q, q) = (dc * lt.aux[k].array() * f * (1.0 - f)).matrix();
        dz.middleRows(2 * q, q) = (dc * i * (1.0 - g * g)).matrix();
        dz.bottomRows(q) = (dh_a * tc * o * (1.0 - o)).matrix();
        carry_aux = (dc * f).matrix();
        grad.recurrent.noalias() += dz * lt.states[k].transpose();
        grad.input.noalias() += dz * lt.inputs[k].transpose();
        grad.bias += dz.rowwise().sum();
        carry_h.noalias() = layer.recurrent.transpose() * dz;
        input_grads[k].noalias() = layer.input.transpose() * dz;
        break;
      }
      case Architecture::cornn: {
        const auto& s = params.cornn;
        // y_t = y_{t-1} + dt z_t
        const Eigen::MatrixXd dz = carry_aux + s.dt * dh;
        // z_t = z_{t-1} + dt (sigma(a_t) - gamma y_{t-1} - eps z_{t-1})
        const Eigen::MatrixXd da = (s.dt * dz).cwiseProduct(apply_act_grad(params.activation, lt.pre[k]));
        grad.recurrent.noalias() += da * lt.states[k].transpose();
        grad.recurrent_z.noalias() += da * lt.aux[k].transpose();
        grad.input.noalias() += da * lt.inputs[k].transpose();
        grad.bias += da.rowwise().sum();
        carry_h = dh - s.dt * s.gamma * dz;
        carry_h.noalias() += layer.recurrent.transpose() * da;
        carry_aux = (1.0 - s.dt * s.epsilon) * dz;
        carry_aux.noalias() += layer.recurrent_z.transpose() * da;
        input_grads[k].noalias() = layer.input.transpose() * da;
        break;
      }
    }
  }
  return input_grads;
}

}  // namespace

ForwardResult forward(const DecoderParams& params, const SequenceBatch& sequence, const ForwardOptions& options) {
  params.validate();
  if (sequence.empty()) throw Error(ErrorCode::DimensionMismatch, "empty input sequence");
  const Eigen::Index B = sequence.front().cols();
  const int width = params.sequence_width();
  for (const auto& s : sequence) {
    if (s.rows() != width || s.cols() != B) {
      throw Error(ErrorCode::DimensionMismatch, "sequence step is " + std::to_string(s.rows()) + "x" +
                                                    std::to_string(s.cols()) + ", expected width " +
                                                    std::to_string(width));
    }
  }
  if (options.dropout_rate < 0.0 || options.dropout_rate >= 1.0) {
    throw Error(ErrorCode::InvalidArgument, "dropout rate must lie in [0, 1)");
  }
  const bool dropout = options.rng != nullptr && options.dropout_rate > 0.0;
  const auto& t = params.tensors;

  ForwardResult res;
  Tape& tape = res.tape;
  tape.architecture = params.architecture;
  tape.dims = params.dims;
  tape.steps = static_cast<int>(sequence.size());
  tape.batch = B;
  tape.embedded_per_step = params.placement == EmbeddingPlacement::post_propagation;
  tape.layers.resize(static_cast<std::size_t>(params.dims.num_layers));

  auto& first = tape.layers.front().inputs;
  first.reserve(sequence.size());
  for (const auto& x : sequence) {
    Eigen::MatrixXd e;
    if (tape.embedded_per_step) {
      Eigen::MatrixXd pre = t.embedding_weight * x;
      pre.colwise() += t.embedding_bias;
      e = apply_act(params.embedding_activation, pre);
      tape.raw_inputs.push_back(x);
      tape.embedding_pre.push_back(std::move(pre));
    } else {
      e = x;
    }
    if (dropout) {
      Eigen::MatrixXd m = dropout_mask(e.rows(), e.cols(), options.dropout_rate, *options.rng);
      e = e.cwiseProduct(m);
      tape.input_masks.push_back(std::move(m));
    }
    first.push_back(std::move(e));
  }

  for (std::size_t l = 0; l < tape.layers.size(); ++l) {
    if (l > 0) {
      const auto& below = tape.layers[l - 1].states;
      tape.layers[l].inputs.assign(below.begin() + 1, below.end());
    }
    run_layer(params, t.layers[l], tape.layers[l], B);
  }

  tape.head_input = tape.layers.back().states.back();
  if (dropout) {
    tape.head_mask = dropout_mask(tape.head_input.rows(), B, options.dropout_rate, *options.rng);
    tape.head_input = tape.head_input.cwiseProduct(tape.head_mask);
  }
  tape.outputs = t.head_weight * tape.head_input;
  tape.outputs.colwise() += t.head_bias;
  res.outputs = tape.outputs;
  return res;
}

Eigen::VectorXd forward_single(const DecoderParams& params, const NodeMatrix& sequence, Tape* tape,
                               const ForwardOptions& options) {
  auto res = forward(params, to_batch(sequence), options);
  if (tape != nullptr) *tape = std::move(res.tape);
  return res.outputs.col(0);
}

BackwardResult backward(const DecoderParams& params, const Tape& tape, const Eigen::MatrixXd& output_grad) {
  params.validate();
  if (tape.architecture != params.architecture || tape.dims.hidden_dim != params.dims.hidden_dim ||
      tape.dims.output_dim != params.dims.output_dim || tape.dims.num_layers != params.dims.num_layers ||
      tape.layers.size() != static_cast<std::size_t>(params.dims.num_layers) ||
      tape.embedded_per_step != (params.placement == EmbeddingPlacement::post_propagation)) {
    throw Error(ErrorCode::TapeMismatch, "tape was recorded with different decoder parameters");
  }
  if (output_grad.rows() != params.dims.output_dim || output_grad.cols() != tape.batch) {
    throw Error(ErrorCode::TapeMismatch, "output gradient shape does not match the recorded batch");
  }
  const auto& t = params.tensors;
  BackwardResult res;
  GradientSet& g = res.grads;
  g = t.zeros_like();

  g.head_weight.noalias() += output_grad * tape.head_input.transpose();
  g.head_bias += output_grad.rowwise().sum();
  Eigen::MatrixXd d_final = t.head_weight.transpose() * output_grad;
  if (tape.head_mask.size() > 0) d_final = d_final.cwiseProduct(tape.head_mask);

  const auto N = static_cast<std::size_t>(tape.steps);
  const int q = params.dims.hidden_dim;
  std::vector<Eigen::MatrixXd> state_grads(N, Eigen::MatrixXd::Zero(q, tape.batch));
  state_grads.back() = d_final;
  for (std::size_t l = tape.layers.size(); l-- > 0;) {
    state_grads = backward_layer(params, t.layers[l], tape.layers[l], state_grads, g.layers[l]);
  }

  res.input_grads.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    Eigen::MatrixXd d = std::move(state_grads[k]);
    if (!tape.input_masks.empty()) d = d.cwiseProduct(tape.input_masks[k]);
    if (tape.embedded_per_step) {
      const Eigen::MatrixXd dpre = d.cwiseProduct(apply_act_grad(params.embedding_activation, tape.embedding_pre[k]));
      g.embedding_weight.noalias() += dpre * tape.raw_inputs[k].transpose();
      g.embedding_bias += dpre.rowwise().sum();
      res.input_grads[k].noalias() = t.embedding_weight.transpose() * dpre;
    } else {
      res.input_grads[k] = std::move(d);
    }
  }
  return res;
}

CornnState cornn_step(const CornnState& state, const Eigen::VectorXd& input, const RecurrentLayer& layer,
                      Activation activation, const CornnScalars& s) {
  const auto q = layer.recurrent.rows();
  if (state.y.size() != q || state.z.size() != q || layer.recurrent_z.rows() != q ||
      layer.input.cols() != input.size() || layer.bias.size() != q) {
    throw Error(ErrorCode::DimensionMismatch, "cornn_step shapes");
  }
  Eigen::VectorXd a = layer.recurrent * state.y + layer.recurrent_z * state.z + layer.input * input + layer.bias;
  CornnState next;
  next.z = state.z + s.dt * (a.unaryExpr([activation](double x) { return activate(activation, x); }) -
                             s.gamma * state.y - s.epsilon * state.z);
  next.y = state.y + s.dt * next.z;
  return next;
}

NodeEmbedding embed_nodes(const DecoderParams& params, const NodeMatrix& features) {
  const auto& t = params.tensors;
  if (features.cols() != t.embedding_weight.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "feature width " + std::to_string(features.cols()) +
                                                  " vs embedding input " + std::to_string(t.embedding_weight.cols()));
  }
  NodeEmbedding emb;
  emb.pre.noalias() = features * t.embedding_weight.transpose();
  emb.pre.rowwise() += t.embedding_bias.transpose();
  emb.output = emb.pre.unaryExpr([a = params.embedding_activation](double x) { return activate(a, x); });
  return emb;
}

NodeMatrix embed_nodes_backward(const DecoderParams& params, const NodeMatrix& features, const NodeEmbedding& emb,
                                const NodeMatrix& output_grad, GradientSet& grads) {
  const NodeMatrix dpre = output_grad.cwiseProduct(
      emb.pre.unaryExpr([a = params.embedding_activation](double x) { return activate_grad(a, x); }));
  grads.embedding_weight.noalias() += dpre.transpose() * features;
  grads.embedding_bias += dpre.colwise().sum().transpose();
  return dpre * params.tensors.embedding_weight;
}

}  // namespace glaudio
