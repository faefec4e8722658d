#include "glaudio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>

#include "glaudio/error.hpp"
#include "glaudio/wave.hpp"

namespace glaudio {

namespace {

constexpr double kMixOracleBudget = 2e9;  // n^2 * samples

struct Stats {
  double sum = 0.0;
  double max = -std::numeric_limits<double>::infinity();
  double min = std::numeric_limits<double>::infinity();
  double abs_max = 0.0;
  long count = 0;

  void add(double x) {
    sum += x;
    max = std::max(max, x);
    min = std::min(min, x);
    abs_max = std::max(abs_max, std::abs(x));
    ++count;
  }
  double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
  // Peak after DC removal; 0 when the signal is constant up to round-off.
  double centered_peak() const {
    if (count == 0) return 0.0;
    const double m = mean();
    const double p = std::max(max - m, m - min);
    return p <= 1e-9 * std::max(1.0, abs_max) ? 0.0 : p;
  }
};

using SampleVisitor = std::function<void(long, const Eigen::VectorXd&)>;

void visit_oracle(const SpectralDecomposition& dec, const Eigen::VectorXd& x, double dt, long count,
                  const SampleVisitor& fn) {
  const Eigen::VectorXd coeff = dec.eigenvectors.transpose() * x;
  Eigen::VectorXd omega = dec.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd modal(dec.size());
  for (long j = 0; j < count; ++j) {
    const double t = dt * static_cast<double>(j);
    for (int i = 0; i < dec.size(); ++i) modal(i) = std::cos(omega(i) * t) * coeff(i);
    fn(j, dec.eigenvectors * modal);
  }
}

void visit_encoder(const LaplacianOperator& op, const Eigen::VectorXd& x0, double h, long count,
                   const SampleVisitor& fn) {
  NodeMatrix x = x0;
  NodeMatrix v = NodeMatrix::Zero(x0.size(), 1);
  NodeMatrix lx;
  for (long j = 0; j < count; ++j) {
    if (j > 0) {
      op.matrix.apply_into(x, lx);
      v -= h * lx;
      x += h * v;
    }
    fn(j, Eigen::Map<const Eigen::VectorXd>(x.data(), x.size()));
  }
}

void normalize(std::vector<double>& s, const Stats& st, double peak) {
  const double p = st.centered_peak();
  const double m = st.mean();
  for (double& x : s) x = p > 0.0 ? peak * (x - m) / p : 0.0;
}

}  // namespace

AudioSignal synthesize_audio(const LaplacianOperator& op, const NodeMatrix& features, std::optional<int> vertex,
                             const WavOptions& o) {
  if (!(o.duration > 0.0)) throw Error(ErrorCode::InvalidArgument, "duration must be positive");
  if (o.sample_rate < 1) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (!(o.peak > 0.0 && o.peak <= 1.0)) throw Error(ErrorCode::InvalidArgument, "peak must lie in (0, 1]");
  const int n = op.dimension();
  if (features.rows() != n) throw Error(ErrorCode::DimensionMismatch, "features/operator");
  if (features.cols() < 1) throw Error(ErrorCode::DimensionMismatch, "features need at least one column");
  if (vertex && (*vertex < 0 || *vertex >= n)) {
    throw Error(ErrorCode::VertexOutOfRange, "vertex " + std::to_string(*vertex));
  }

  AudioSignal out;
  out.sample_rate = o.sample_rate;
  const long count = std::lround(o.duration * o.sample_rate);
  const Eigen::VectorXd x0 = features.col(0);

  std::optional<SpectralDecomposition> dec;
  if (n <= o.oracle_limit && !(!vertex && static_cast<double>(n) * n * static_cast<double>(count) > kMixOracleBudget)) {
    dec = eigendecompose(op, o.oracle_limit);
    out.route = "oracle";
  } else {
    out.route = "encoder";
    out.notices.push_back(n > o.oracle_limit ? "TooLargeForOracle: " + std::to_string(n) +
                                                   " vertices, using the encoder"
                                             : "mix mode over " + std::to_string(n) +
                                                   " vertices exceeds the oracle budget, using the encoder");
  }

  double lambda_max = dec ? std::max(dec->eigenvalues.maxCoeff(), 0.0) : op.max_eigenvalue_bound;
  out.time_scale = o.time_scale;
  if (out.time_scale <= 0.0) {
    if (lambda_max > 0.0) {
      out.time_scale = 2.0 * std::numbers::pi * o.target_frequency_hz / std::sqrt(lambda_max);
    } else {
      out.time_scale = 1.0;
      out.notices.push_back("operator has no positive eigenvalue, time scale left at 1");
    }
  }
  const double dt = out.time_scale / o.sample_rate;
  auto visit = [&](const SampleVisitor& fn) {
    if (dec) {
      visit_oracle(*dec, x0, dt, count, fn);
    } else {
      visit_encoder(op, x0, dt, count, fn);
    }
  };

  out.samples.assign(static_cast<std::size_t>(count), 0.0);
  if (vertex) {
    Stats st;
    visit([&](long j, const Eigen::VectorXd& x) {
      out.samples[static_cast<std::size_t>(j)] = x(*vertex);
      st.add(x(*vertex));
    });
    normalize(out.samples, st, o.peak);
  } else {
    std::vector<Stats> st(static_cast<std::size_t>(n));
    visit([&](long, const Eigen::VectorXd& x) {
      for (int v = 0; v < n; ++v) st[static_cast<std::size_t>(v)].add(x(v));
    });
    Stats mix;
    visit([&](long j, const Eigen::VectorXd& x) {
      double acc = 0.0;
      for (int v = 0; v < n; ++v) {
        const auto& s = st[static_cast<std::size_t>(v)];
        const double p = s.centered_peak();
        if (p > 0.0) acc += (x(v) - s.mean()) / p;
      }
      acc /= n;
      out.samples[static_cast<std::size_t>(j)] = acc;
      mix.add(acc);
    });
    normalize(out.samples, mix, o.peak);
  }
  out.silent = std::all_of(out.samples.begin(), out.samples.end(), [](double s) { return s == 0.0; });
  if (out.silent) out.notices.push_back("ZeroSignal: writing silence");
  return out;
}

std::vector<std::uint8_t> encode_wav(const std::vector<double>& samples, int sample_rate) {
  if (sample_rate < 1) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> b;
  b.reserve(44 + data_bytes);
  auto tag = [&b](const char* s) { b.insert(b.end(), s, s + 4); };
  auto u32 = [&b](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto u16 = [&b](std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  tag("RIFF");
  u32(36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(1);  // PCM
  u16(1);  // mono
  u32(static_cast<std::uint32_t>(sample_rate));
  u32(static_cast<std::uint32_t>(sample_rate) * 2);
  u16(2);
  u16(16);
  tag("data");
  u32(data_bytes);
  for (double s : samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32767.0))));
  }
  return b;
}

void write_wav(const std::string& path, const std::vector<double>& samples, int sample_rate) {
  const auto bytes = encode_wav(samples, sample_rate);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

DecodedWav decode_wav(const std::vector<std::uint8_t>& b) {
  auto u32 = [&b](std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
  };
  auto u16 = [&b](std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
  };
  auto tag_is = [&b](std::size_t at, const char* s) { return std::equal(s, s + 4, b.begin() + static_cast<long>(at)); };
  if (b.size() < 44 || !tag_is(0, "RIFF") || !tag_is(8, "WAVE") || !tag_is(12, "fmt ") || !tag_is(36, "data")) {
    throw Error(ErrorCode::ParseError, "not a canonical 44-byte-header WAV file");
  }
  DecodedWav w;
  w.channels = u16(22);
  w.sample_rate = static_cast<int>(u32(24));
  w.bits_per_sample = u16(34);
  const std::uint32_t data = u32(40);
  if (u16(20) != 1 || w.bits_per_sample != 16 || 44 + static_cast<std::size_t>(data) > b.size()) {
    throw Error(ErrorCode::ParseError, "unsupported or truncated PCM data");
  }
  for (std::size_t i = 0; i < data / 2; ++i) w.samples.push_back(static_cast<std::int16_t>(u16(44 + 2 * i)));
  return w;
}

}  // namespace glaudio
