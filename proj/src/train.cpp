#include "ynkit/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>

#include <json.hpp>

#include "ynkit/errors.hpp"
#include "ynkit/evaluation.hpp"
#include "ynkit/kernels.hpp"
#include "ynkit/rng.hpp"

namespace ynk {

namespace {

using json = nlohmann::ordered_json;

struct Example {
  std::string id;
  FeatureMatrix features;
  std::vector<std::int32_t> label;
};

std::vector<Example> load_examples(const std::vector<Utterance>& utts,
                                   const TokenVocabulary& vocab,
                                   const PhonemeInventory& inv,
                                   const std::filesystem::path& feature_root) {
  std::vector<Example> examples;
  examples.reserve(utts.size());
  for (const Utterance& utt : utts) {
    const std::filesystem::path path = feature_root / utt.feature_path;
    if (!std::filesystem::exists(path)) throw MissingFeatureFile(utt.id);
    Example ex;
    ex.id = utt.id;
    ex.features = read_features(path);
    ex.label = encode(utt.orth, vocab, inv, /*allow_unk=*/false).ids;
    const std::size_t needed = ctc_min_frames(ex.label);
    if (ex.features.frames < needed)
      throw InfeasibleLabel(ex.features.frames, needed, utt.id);
    examples.push_back(std::move(ex));
  }
  return examples;
}

struct ValidStats {
  double loss = 0.0;
  double cer = 0.0;
  double wer = 0.0;
};

// Greedy-decode validation pass; CER/WER pooled over the split in the
// vocabulary's native token space. Word boundaries count as units.
ValidStats validate(const ModelParams& params,
                    const std::vector<Example>& valid) {
  const std::int32_t forbidden[] = {TokenVocabulary::kPadId};
  ValidStats stats;
  std::size_t unit_edits = 0, units = 0;
  std::size_t word_edits = 0, words = 0;
  std::vector<std::vector<std::int32_t>> ref_words, hyp_words;
  for (const Example& ex : valid) {
    const LogitMatrix logits = forward(params, ex.features);
    stats.loss += ctc_loss_value(logits, ex.label);
    const DecodeResult decoded = greedy_decode(logits, forbidden);

    unit_edits += levenshtein_distance<std::int32_t>(ex.label, decoded.ids);
    units += ex.label.size();

    const auto split_on_delim = [](std::span<const std::int32_t> ids) {
      std::vector<std::vector<std::int32_t>> out;
      std::vector<std::int32_t> cur;
      for (std::int32_t id : ids) {
        if (id == TokenVocabulary::kWordDelimId) {
          if (!cur.empty()) out.push_back(std::move(cur));
          cur.clear();
        } else {
          cur.push_back(id);
        }
      }
      if (!cur.empty()) out.push_back(std::move(cur));
      return out;
    };
    ref_words = split_on_delim(ex.label);
    hyp_words = split_on_delim(decoded.ids);
    word_edits += levenshtein_distance<std::vector<std::int32_t>>(ref_words, hyp_words);
    words += ref_words.size();
  }
  stats.loss /= static_cast<double>(valid.size());
  stats.cer = units == 0 ? 0.0 : static_cast<double>(unit_edits) / static_cast<double>(units);
  stats.wer = words == 0 ? 0.0 : static_cast<double>(word_edits) / static_cast<double>(words);
  return stats;
}

}  // namespace

std::string TrainReport::to_json_string() const {
  json root;
  root["version"] = 1;
  root["best_epoch"] = best_epoch;
  root["stopped_early"] = stopped_early;
  json rows = json::array();
  for (const EpochStats& e : epochs) {
    rows.push_back({{"train_loss", e.train_loss},
                    {"valid_loss", e.valid_loss},
                    {"valid_cer", e.valid_cer},
                    {"valid_wer", e.valid_wer},
                    {"lr", e.lr}});
  }
  root["epochs"] = std::move(rows);
  return root.dump(2) + "\n";
}

void TrainReport::to_json_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << to_json_string();
  if (!out) throw IoError(path.string(), "write failed");
}

std::string TrainReport::to_table() const {
  std::string table =
      "epoch  train_loss  valid_loss  valid_cer  valid_wer        lr\n";
  char buf[128];
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const EpochStats& e = epochs[i];
    std::snprintf(buf, sizeof(buf), "%5zu  %10.4f  %10.4f  %9.4f  %9.4f  %8.6f%s\n",
                  i + 1, e.train_loss, e.valid_loss, e.valid_cer, e.valid_wer,
                  e.lr, (i + 1 == best_epoch) ? "  *best" : "");
    table += buf;
  }
  if (stopped_early) table += "(stopped early)\n";
  return table;
}

TrainResult train(const std::vector<Utterance>& train_utts,
                  const std::vector<Utterance>& valid_utts,
                  const TokenVocabulary& vocab, const PhonemeInventory& inv,
                  const std::filesystem::path& feature_root,
                  const ModelConfig& model_config, const TrainConfig& config) {
  if (train_utts.empty()) throw EmptySplit("train");
  if (valid_utts.empty()) throw EmptySplit("validation");
  if (config.epochs < 1 || !(config.lr_init > 0.0) || config.batch_size < 1)
    throw Error("invalid_argument", "bad training config");
  if (model_config.vocab_size != vocab.size())
    throw DimensionMismatch("model vocab_size does not match vocabulary");

  const std::vector<Example> train_set =
      load_examples(train_utts, vocab, inv, feature_root);
  const std::vector<Example> valid_set =
      load_examples(valid_utts, vocab, inv, feature_root);

  ModelParams params = ModelParams::init(model_config);
  Gradients grad(model_config);

  const std::size_t steps_per_epoch =
      (train_set.size() + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = config.epochs * steps_per_epoch;
  const auto lr_at = [&](std::size_t step) {
    return config.lr_init *
           (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
  };

  Rng shuffle_rng(Rng::mix(config.seed, 0x73687566ULL));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  result.best = params;
  double best_cer = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_improvement = 0;
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochStats stats;
    stats.lr = lr_at(step);
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      grad.zero();
      for (std::size_t i = start; i < end; ++i) {
        const Example& ex = train_set[order[i]];
        try {
          epoch_loss += backward(params, ex.features, ex.label, grad);
        } catch (const InfeasibleLabel& e) {
          throw InfeasibleLabel(e.frames, e.needed, ex.id);
        }
      }
      // Mean gradient over the batch keeps lr meaningful across batch sizes.
      const double scale = -lr_at(step) / static_cast<double>(end - start);
      kernels::axpy(scale, grad.w1.data(), params.w1.data(), grad.w1.size());
      kernels::axpy(scale, grad.b1.data(), params.b1.data(), grad.b1.size());
      kernels::axpy(scale, grad.w2.data(), params.w2.data(), grad.w2.size());
      kernels::axpy(scale, grad.b2.data(), params.b2.data(), grad.b2.size());
      ++step;
    }
    stats.train_loss = epoch_loss / static_cast<double>(train_set.size());

    const ValidStats valid = validate(params, valid_set);
    stats.valid_loss = valid.loss;
    stats.valid_cer = valid.cer;
    stats.valid_wer = valid.wer;
    result.report.epochs.push_back(stats);

    if (valid.cer < best_cer) {
      best_cer = valid.cer;
      result.best = params;
      result.report.best_epoch = epoch + 1;
      epochs_since_improvement = 0;
    } else {
      ++epochs_since_improvement;
      if (config.early_stop_patience > 0 &&
          epochs_since_improvement >= config.early_stop_patience &&
          epoch + 1 < config.epochs) {
        result.report.stopped_early = true;
        break;
      }
    }
  }
  return result;
}

}  // namespace ynk
