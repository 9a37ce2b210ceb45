#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ynkit/corpus.hpp"
#include "ynkit/model.hpp"
#include "ynkit/phonology.hpp"
#include "ynkit/tokenization.hpp"

namespace ynk {

enum class EditType { Match, Substitute, Delete, Insert };

struct EditOp {
  EditType type;
  std::string ref_tok;  // empty for Insert
  std::string hyp_tok;  // empty for Delete
};

struct EditScript {
  std::vector<EditOp> ops;
  std::size_t matches = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t distance() const { return substitutions + deletions + insertions; }
};

// Unit-cost dynamic program; backtrace prefers Match > Substitute > Delete >
// Insert so scripts are deterministic. Replaying ops over ref yields hyp.
EditScript levenshtein_align(std::span<const std::string> ref,
                             std::span<const std::string> hyp);

// Distance-only fast path over any equality-comparable token type.
template <typename T>
std::size_t levenshtein_distance(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t m = ref.size(), n = hyp.size();
  std::vector<std::size_t> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

enum class Unit { grapheme, phoneme };

const char* unit_name(Unit u);
Unit unit_from(std::string_view name);

// Splits text into alignment units. Grapheme: extended grapheme clusters
// with spaces rendered "_". Phoneme: transduce, then one display symbol per
// phoneme with word boundaries rendered "_". `lenient` keeps unparseable
// clusters verbatim instead of throwing (used on hypothesis text).
std::vector<std::string> units_of(std::string_view text, Unit unit,
                                  const PhonemeInventory& inv,
                                  bool lenient = false);

// (S+D+I)/N over reference units; spaces count as units. Throws
// EmptyReference when ref has no units.
double cer(std::string_view ref, std::string_view hyp, Unit unit,
           const PhonemeInventory& inv);

// Same formula over whitespace-separated words.
double wer(std::string_view ref, std::string_view hyp);

struct ErrorSummary {
  std::string model_label;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t substitutions = 0;
  std::size_t total() const { return deletions + insertions + substitutions; }
};

struct FrequencyRow {
  std::string ref_tok;  // empty for insertions
  std::string hyp_tok;  // empty for deletions
  std::size_t count = 0;
};

struct ErrorFrequencyTable {
  EditType kind = EditType::Delete;
  std::vector<FrequencyRow> rows;  // count desc, then key asc; at most k
};

struct ErrorReport {
  std::string model_label;
  std::size_t n_utts = 0;
  double cer = 0.0;  // micro-averaged: total edits / total reference units
  double wer = 0.0;
  ErrorSummary summary;
  ErrorFrequencyTable deletions;
  ErrorFrequencyTable insertions;
  ErrorFrequencyTable substitutions;

  std::string to_json_string() const;
  void to_json_file(const std::filesystem::path& path) const;
  // CSV columns: kind,ref_token,hyp_token,count.
  std::string tables_to_csv() const;
  void tables_to_csv_file(const std::filesystem::path& path) const;
};

// Pools edit scripts across (ref, hyp) text pairs; whitespace shows as "_"
// and phonemes as display symbols in the tables.
ErrorReport error_frequencies(
    std::span<const std::pair<std::string, std::string>> pairs, Unit unit,
    const PhonemeInventory& inv, std::size_t top_k = 20,
    std::string model_label = {});

enum class DecodeStrategy { greedy, beam };

struct EvalOptions {
  DecodeStrategy strategy = DecodeStrategy::greedy;
  std::size_t beam_width = 8;
  // When set (grapheme models only), hypotheses and references are
  // transduced to phonemes before scoring so both tokenizations share one
  // unit space.
  bool common_space_ipa = false;
  std::size_t top_k = 20;
};

// Decodes every utterance and scores it against the cleaned transcript in
// the vocabulary's native token space (or common IPA space when requested).
// feature_path entries resolve relative to `feature_root`.
ErrorReport evaluate_model(const ModelParams& params,
                           const std::vector<Utterance>& utts,
                           const TokenVocabulary& vocab,
                           const PhonemeInventory& inv,
                           const std::filesystem::path& feature_root,
                           const EvalOptions& options = {});

}  // namespace ynk
