#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ynk {

enum class PhonemeKind { consonant, vowel };

enum class Place {
  bilabial,
  alveolar,
  retroflex,
  laminodental,
  palatal,
  velar,
  glottal,
  none
};

enum class Manner {
  stop_voiceless,
  stop_voiced,
  nasal,
  lateral,
  rhotic,
  glide,
  none
};

enum class Length { short_vowel, long_vowel, none };

struct Phoneme {
  std::string ipa;      // canonical IPA form, unique
  std::string orth;     // orthographic spelling, unique
  std::string display;  // single ASCII report symbol, unique
  PhonemeKind kind;
  Place place;
  Manner manner;
  Length length;
};

// Immutable after construction; all lookups are read-only and thread-safe.
class PhonemeInventory {
 public:
  PhonemeInventory(std::vector<Phoneme> phonemes, std::string separator);

  // The 31-phoneme Yan-nhangu inventory (25 consonants, 6 vowels).
  static const PhonemeInventory& defaults();

  static PhonemeInventory from_json_file(const std::filesystem::path& path);
  void to_json_file(const std::filesystem::path& path) const;
  std::string to_json_string() const;
  static PhonemeInventory from_json_string(const std::string& text);

  const std::vector<Phoneme>& phonemes() const { return phonemes_; }
  const Phoneme& at(std::size_t i) const { return phonemes_[i]; }
  std::size_t size() const { return phonemes_.size(); }
  std::size_t consonant_count() const { return consonant_count_; }
  std::size_t vowel_count() const { return vowel_count_; }

  const std::string& separator() const { return separator_; }
  char32_t separator_cp() const { return separator_cp_; }

  // Index lookups by canonical code-point string; -1 when absent.
  int find_by_orth(const std::u32string& orth) const;
  int find_by_ipa(const std::u32string& ipa) const;
  int find_by_ipa(std::string_view ipa) const;

  std::size_t max_orth_cps() const { return max_orth_cps_; }
  std::size_t max_ipa_cps() const { return max_ipa_cps_; }

 private:
  std::vector<Phoneme> phonemes_;
  std::string separator_;
  char32_t separator_cp_;
  std::size_t consonant_count_ = 0;
  std::size_t vowel_count_ = 0;
  std::size_t max_orth_cps_ = 0;
  std::size_t max_ipa_cps_ = 0;
  std::unordered_map<std::u32string, int> by_orth_;
  std::unordered_map<std::u32string, int> by_ipa_;
};

// A phoneme sequence with word boundaries; elements are indices into the
// owning inventory, kWordBoundary marks a space.
struct PhonemeString {
  static constexpr std::int32_t kWordBoundary = -1;
  std::vector<std::int32_t> elems;

  bool operator==(const PhonemeString&) const = default;
};

// Canonical code-point form for orthographic text: precomposed underlined
// letters become base letter + U+0331, a + U+0308 becomes U+00E4 (case
// preserved). Idempotent; does not touch case, punctuation or spacing.
std::string canonicalize_orth(std::string_view text);

// Orthography-aware lowercasing: ASCII A-Z, Ŋ, Ä and the precomposed
// underlined capitals.
std::string lowercase_orth(std::string_view text);

// Left-to-right maximal-munch scan. Spaces become word boundaries (runs
// collapse, leading/trailing are dropped); the separator mark is consumed
// silently. Throws UnrecognizedGrapheme when nothing matches.
PhonemeString orth_to_ipa(std::string_view text, const PhonemeInventory& inv);

// Inverse of orth_to_ipa. Inserts the separator between two spellings
// whenever naive concatenation would re-parse differently under maximal
// munch. Throws UnknownPhoneme on out-of-range indices.
std::string ipa_to_orth(const PhonemeString& ps, const PhonemeInventory& inv);

// Maximal-munch scan over IPA forms (the reverse direction of orth_to_ipa's
// input); used by the CLI to parse IPA text back into phonemes.
PhonemeString parse_ipa(std::string_view text, const PhonemeInventory& inv);

// Single-character ASCII report symbol.
const std::string& display_symbol(const Phoneme& p);

// Concatenated IPA forms; word boundaries rendered as `boundary`.
std::string ipa_string(const PhonemeString& ps, const PhonemeInventory& inv,
                       std::string_view boundary = " ");

}  // namespace ynk
