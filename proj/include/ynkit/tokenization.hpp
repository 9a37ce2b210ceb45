#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ynkit/phonology.hpp"

namespace ynk {

enum class TokenLevel { grapheme, phoneme };

const char* token_level_name(TokenLevel level);
TokenLevel token_level_from(std::string_view name);

// Ordered token table with the reserved block fixed at the front:
// blank=0, pad=1, unk=2, word delimiter "_"=3, then content tokens sorted
// bytewise. Immutable after construction.
class TokenVocabulary {
 public:
  static constexpr std::int32_t kBlankId = 0;
  static constexpr std::int32_t kPadId = 1;
  static constexpr std::int32_t kUnkId = 2;
  static constexpr std::int32_t kWordDelimId = 3;
  static constexpr std::size_t kReservedCount = 4;

  TokenVocabulary(TokenLevel level, std::vector<std::string> content_tokens);

  TokenLevel level() const { return level_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::int32_t id) const;
  // -1 when absent.
  std::int32_t id_of(std::string_view token) const;

  // FNV-1a over the token list and level; ties checkpoints to vocabularies.
  std::uint64_t fingerprint() const;

  std::string to_json_string() const;
  void to_json_file(const std::filesystem::path& path) const;
  static TokenVocabulary from_json_string(const std::string& text);
  static TokenVocabulary from_json_file(const std::filesystem::path& path);

 private:
  TokenLevel level_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> id_of_;
};

struct TokenSequence {
  std::vector<std::int32_t> ids;
  TokenLevel level;

  bool operator==(const TokenSequence&) const = default;
};

// Collects the distinct units of the corpus at the given level. Texts must
// already be cleaned; order of texts does not affect the result.
TokenVocabulary build_vocab(const std::vector<std::string>& corpus_texts,
                            TokenLevel level, const PhonemeInventory& inv);

// Grapheme level: one id per extended grapheme cluster, spaces to the word
// delimiter. Phoneme level: transduce, then one id per phoneme. Unknown
// units map to unk when allow_unk, otherwise throw OutOfVocabulary.
TokenSequence encode(std::string_view text, const TokenVocabulary& vocab,
                     const PhonemeInventory& inv, bool allow_unk = false);

// Concatenates token strings; the word delimiter renders as a space. For
// phoneme vocabularies the result is the IPA string.
std::string decode(const TokenSequence& seq, const TokenVocabulary& vocab);

}  // namespace ynk
