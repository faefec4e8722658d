#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glaudio/graph.hpp"
#include "glaudio/spectral.hpp"

namespace glaudio {

struct WavOptions {
  int sample_rate = 44100;
  double duration = 2.0;  // seconds
  // Graph time per audio second. 0 maps sqrt(lambda_max) to target_frequency_hz.
  double time_scale = 0.0;
  double target_frequency_hz = 2000.0;
  double peak = 0.9;  // full-scale fraction after normalization
  int oracle_limit = kDefaultOracleLimit;
};

struct AudioSignal {
  std::vector<double> samples;  // in [-peak, peak]
  int sample_rate = 0;
  double time_scale = 0.0;
  std::string route;  // "oracle" or "encoder"
  std::vector<std::string> notices;
  bool silent = false;
};

// Per-vertex signal of the first feature column (or the mean of per-vertex
// signals, each normalized, when vertex is empty), DC removed and
// peak-normalized. Exact signal when n <= oracle_limit, otherwise the encoder
// with h = time_scale / sample_rate.
AudioSignal synthesize_audio(const LaplacianOperator& op, const NodeMatrix& features, std::optional<int> vertex,
                             const WavOptions& options = {});

// Canonical 44-byte header, mono 16-bit little-endian PCM.
std::vector<std::uint8_t> encode_wav(const std::vector<double>& samples, int sample_rate);
void write_wav(const std::string& path, const std::vector<double>& samples, int sample_rate);

struct DecodedWav {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::vector<std::int16_t> samples;
};
DecodedWav decode_wav(const std::vector<std::uint8_t>& bytes);

}  // namespace glaudio
