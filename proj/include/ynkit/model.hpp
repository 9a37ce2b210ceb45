#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ynkit/ctc.hpp"
#include "ynkit/features.hpp"
#include "ynkit/tokenization.hpp"

namespace ynk {

// Frame classifier: tanh hidden layer over a symmetric context window of
// feature frames, linear output layer to per-token logits.
struct ModelConfig {
  std::size_t input_dim = 0;    // feature dimension D
  std::size_t context = 2;      // window is (2*context+1)*D
  std::size_t hidden_dim = 64;
  std::size_t vocab_size = 0;
  std::uint64_t seed = 0;

  std::size_t window_dim() const { return (2 * context + 1) * input_dim; }
};

struct ModelParams {
  ModelConfig config;
  std::vector<double> w1;  // hidden_dim x window_dim
  std::vector<double> b1;  // hidden_dim
  std::vector<double> w2;  // vocab_size x hidden_dim
  std::vector<double> b2;  // vocab_size

  // Seeded uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] weights, zero biases.
  static ModelParams init(const ModelConfig& config);
};

struct Gradients {
  std::vector<double> w1, b1, w2, b2;

  explicit Gradients(const ModelConfig& config);
  void zero();
};

LogitMatrix forward(const ModelParams& params, const FeatureMatrix& features);

// Accumulates parameter gradients for one utterance into `acc` and returns
// the CTC loss; identical to ctc_loss(forward(...), label).loss.
double backward(const ModelParams& params, const FeatureMatrix& features,
                std::span<const std::int32_t> label, Gradients& acc);

// Versioned JSON checkpoint with a vocabulary fingerprint and a content
// checksum; doubles serialize as shortest round-trip decimals, so load is
// bit-faithful.
void save_checkpoint(const ModelParams& params, std::uint64_t vocab_fingerprint,
                     const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path,
                            const TokenVocabulary& vocab);

}  // namespace ynk
