#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ynk {

// T x V unnormalized per-frame scores, row-major. Blank is always id 0.
struct LogitMatrix {
  std::size_t frames = 0;
  std::size_t vocab = 0;
  std::vector<double> values;

  LogitMatrix() = default;
  LogitMatrix(std::size_t t, std::size_t v)
      : frames(t), vocab(v), values(t * v, 0.0) {}

  double& at(std::size_t t, std::size_t v) { return values[t * vocab + v]; }
  double at(std::size_t t, std::size_t v) const { return values[t * vocab + v]; }
  double* row(std::size_t t) { return values.data() + t * vocab; }
  const double* row(std::size_t t) const { return values.data() + t * vocab; }
};

struct CtcLossResult {
  double loss = 0.0;               // negative log-likelihood
  std::vector<double> grad;        // T x V, d loss / d logits
};

// Forward-backward in log space over the blank-interleaved label sequence.
// Gradient rows each sum to zero (softmax minus posterior). Throws
// InfeasibleLabel when no alignment exists and DimensionMismatch on bad ids.
CtcLossResult ctc_loss(const LogitMatrix& logits,
                       std::span<const std::int32_t> label);

// Forward pass only; same loss as ctc_loss without the gradient work.
double ctc_loss_value(const LogitMatrix& logits,
                      std::span<const std::int32_t> label);

// Test oracle: enumerates all V^T frame paths, keeps those whose collapse
// (remove adjacent repeats, then blanks) equals the label, and returns
// -log of the exact probability sum (+infinity when no path matches).
// Guarded to T <= 8, V <= 5.
double ctc_loss_bruteforce(const LogitMatrix& logits,
                           std::span<const std::int32_t> label);

// Smallest T that admits an alignment: |label| plus one per adjacent repeat.
std::size_t ctc_min_frames(std::span<const std::int32_t> label);

struct DecodeResult {
  std::vector<std::int32_t> ids;  // collapsed labeling, no blank
  double score = 0.0;             // log-probability under the strategy
};

// Per-frame argmax (ties to the lowest id), collapse repeats, drop blanks.
// Ids listed in `forbidden` are never selected. Score is the summed
// log-softmax of the chosen path.
DecodeResult greedy_decode(const LogitMatrix& logits,
                           std::span<const std::int32_t> forbidden = {});

// Prefix beam search merging equal collapsed prefixes with separate
// blank/non-blank ending mass. Score is the total log-probability of the
// returned labeling under the kept beams. Note beam_width=1 does not
// necessarily return the greedy labeling: greedy follows one frame path,
// the beam tracks labeling mass.
DecodeResult beam_decode(const LogitMatrix& logits, std::size_t beam_width,
                         std::span<const std::int32_t> forbidden = {});

}  // namespace ynk
