#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ynkit/corpus.hpp"
#include "ynkit/model.hpp"
#include "ynkit/tokenization.hpp"

namespace ynk {

struct TrainConfig {
  std::size_t epochs = 16;
  // From-scratch training on the synthetic features needs a rate around
  // 1e-2..5e-2 to leave the all-blank plateau inside the 16-epoch cap;
  // rates tuned for fine-tuning large pretrained models (1e-5) are far too
  // small here and are available through the flag.
  double lr_init = 0.03;
  std::size_t batch_size = 8;
  // Stop after this many epochs without a validation-CER improvement.
  // 0 disables early stopping entirely.
  std::size_t early_stop_patience = 3;
  std::uint64_t seed = 0;
};

struct EpochStats {
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_cer = 0.0;
  double valid_wer = 0.0;
  double lr = 0.0;  // learning rate at the first step of the epoch
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;  // 1-based index of the minimum validation CER
  bool stopped_early = false;

  std::string to_json_string() const;
  void to_json_file(const std::filesystem::path& path) const;
  std::string to_table() const;
};

struct TrainResult {
  ModelParams best;  // parameters from the best-CER epoch
  TrainReport report;
};

// Plain SGD over utterance minibatches (gradient averaged over the batch),
// per-step lr = lr_init * (1 - step/total_steps), greedy-decode validation
// CER/WER after each epoch, early stopping on CER. Fully deterministic for
// a fixed seed. feature_path entries resolve relative to `feature_root`.
TrainResult train(const std::vector<Utterance>& train_utts,
                  const std::vector<Utterance>& valid_utts,
                  const TokenVocabulary& vocab, const PhonemeInventory& inv,
                  const std::filesystem::path& feature_root,
                  const ModelConfig& model_config, const TrainConfig& config);

}  // namespace ynk
