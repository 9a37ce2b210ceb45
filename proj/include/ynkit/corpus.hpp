#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ynkit/phonology.hpp"

namespace ynk {

enum class ExcludeReason { none, incomplete, contains_english, empty };

const char* exclude_reason_name(ExcludeReason r);
ExcludeReason exclude_reason_from(std::string_view name);

struct Utterance {
  std::string id;
  std::string orth;
  double duration_s = 0.0;
  std::string feature_path;
  std::optional<std::string> speaker;
  bool exclude = false;
  ExcludeReason exclude_reason = ExcludeReason::none;
};

// Removes punctuation and digits (keeping apostrophes and the segmentation
// separator between letters), lowercases, collapses whitespace, trims, and
// canonicalizes code-point forms. Total and idempotent.
std::string clean_text(std::string_view raw);

// JSONL, one utterance per line. feature_path entries are kept verbatim;
// resolve them relative to the manifest's directory at load time.
std::vector<Utterance> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<Utterance>& utts,
                    const std::filesystem::path& path);

struct CorpusStats {
  std::size_t kept = 0;
  std::size_t excluded_flagged = 0;
  std::size_t excluded_empty = 0;
  double total_minutes = 0.0;
};

// Drops rows flagged exclude and rows whose cleaned text is empty (marked
// with reason `empty`); returns the kept utterances with cleaned text.
std::vector<Utterance> apply_exclusions(const std::vector<Utterance>& utts,
                                        CorpusStats* stats = nullptr);

struct SplitManifest {
  std::vector<std::string> train_ids;
  std::vector<std::string> valid_ids;
  std::uint64_t seed = 0;

  std::string to_json_string() const;
  void to_json_file(const std::filesystem::path& path) const;
  static SplitManifest from_json_file(const std::filesystem::path& path);
};

// Deterministic shuffle then prefix split; train gets floor(train_frac * n).
SplitManifest split(const std::vector<Utterance>& utts, std::uint64_t seed,
                    double train_frac = 0.8);

struct SubsetResult {
  std::vector<Utterance> utts;
  double actual_minutes = 0.0;
  bool exhausted = false;  // corpus ran out before reaching the request
};

// Greedy prefix of one seed-fixed shuffle, so subsets for increasing minute
// budgets are nested.
SubsetResult subset_by_minutes(const std::vector<Utterance>& utts,
                               double minutes, std::uint64_t seed);

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t lexicon_words = 200;
  std::size_t utterances = 6400;  // ~160 synthetic minutes at the defaults
  std::size_t dim = 16;
  double noise = 0.3;
  double digraph_fraction = 0.25;
};

struct SynthResult {
  std::filesystem::path manifest_path;
  std::size_t n_utterances = 0;
  double total_minutes = 0.0;
  std::vector<std::string> lexicon;  // orthographic words
};

// Writes manifest.jsonl, features/*.ynf and synth_meta.json under out_dir.
// Every phoneme (plus a word-boundary silence unit) gets a unit-norm
// prototype vector; frames are prototype + N(0, noise^2). Byte-identical
// re-runs for a fixed config.
SynthResult generate_synthetic(const SynthConfig& cfg,
                               const PhonemeInventory& inv,
                               const std::filesystem::path& out_dir);

}  // namespace ynk
