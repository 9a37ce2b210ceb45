#include "ynkit/tokenization.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ynkit/errors.hpp"
#include "ynkit/utf8.hpp"

namespace ynk {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kBlankToken = "<blank>";
constexpr const char* kPadToken = "<pad>";
constexpr const char* kUnkToken = "<unk>";
constexpr const char* kWordDelimToken = "_";

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

const char* token_level_name(TokenLevel level) {
  return level == TokenLevel::grapheme ? "grapheme" : "phoneme";
}

TokenLevel token_level_from(std::string_view name) {
  if (name == "grapheme") return TokenLevel::grapheme;
  if (name == "phoneme") return TokenLevel::phoneme;
  throw Error("invalid_vocab", "unknown token level: " + std::string(name));
}

TokenVocabulary::TokenVocabulary(TokenLevel level,
                                 std::vector<std::string> content_tokens)
    : level_(level) {
  tokens_ = {kBlankToken, kPadToken, kUnkToken, kWordDelimToken};
  std::sort(content_tokens.begin(), content_tokens.end());
  content_tokens.erase(
      std::unique(content_tokens.begin(), content_tokens.end()),
      content_tokens.end());
  for (std::string& t : content_tokens) {
    if (t.empty()) throw Error("invalid_vocab", "empty content token");
    tokens_.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!id_of_.emplace(tokens_[i], static_cast<std::int32_t>(i)).second)
      throw Error("invalid_vocab", "duplicate token: " + tokens_[i]);
  }
}

const std::string& TokenVocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw InvalidId(id);
  return tokens_[static_cast<std::size_t>(id)];
}

std::int32_t TokenVocabulary::id_of(std::string_view token) const {
  const auto it = id_of_.find(std::string(token));
  return it == id_of_.end() ? -1 : it->second;
}

std::uint64_t TokenVocabulary::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  h = fnv1a64(token_level_name(level_), h);
  for (const std::string& t : tokens_) {
    h = fnv1a64(std::string_view("\0", 1), h);
    h = fnv1a64(t, h);
  }
  return h;
}

std::string TokenVocabulary::to_json_string() const {
  json root;
  root["version"] = 1;
  root["level"] = token_level_name(level_);
  root["tokens"] = tokens_;
  root["blank_id"] = kBlankId;
  root["pad_id"] = kPadId;
  root["unk_id"] = kUnkId;
  root["word_delim_id"] = kWordDelimId;
  return root.dump(2) + "\n";
}

void TokenVocabulary::to_json_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << to_json_string();
  if (!out) throw IoError(path.string(), "write failed");
}

TokenVocabulary TokenVocabulary::from_json_string(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("invalid_vocab", std::string("json parse: ") + e.what());
  }
  try {
    if (root.at("version").get<int>() != 1)
      throw VersionUnsupported(root.at("version").get<long long>());
    const TokenLevel level = token_level_from(root.at("level").get<std::string>());
    const auto tokens = root.at("tokens").get<std::vector<std::string>>();
    if (tokens.size() < kReservedCount || tokens[0] != kBlankToken ||
        tokens[1] != kPadToken || tokens[2] != kUnkToken ||
        tokens[3] != kWordDelimToken)
      throw Error("invalid_vocab", "reserved token block malformed");
    TokenVocabulary vocab(level,
                          std::vector<std::string>(tokens.begin() + kReservedCount,
                                                   tokens.end()));
    if (vocab.tokens() != tokens)
      throw Error("invalid_vocab", "content tokens not in canonical order");
    return vocab;
  } catch (const json::exception& e) {
    throw Error("invalid_vocab", std::string("bad vocab json: ") + e.what());
  }
}

TokenVocabulary TokenVocabulary::from_json_file(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

TokenVocabulary build_vocab(const std::vector<std::string>& corpus_texts,
                            TokenLevel level, const PhonemeInventory& inv) {
  std::set<std::string> units;
  for (const std::string& text : corpus_texts) {
    if (level == TokenLevel::grapheme) {
      for (const std::string& g :
           utf8::grapheme_clusters(canonicalize_orth(text)))
        if (g != " " && g != "\t") units.insert(g);
    } else {
      const PhonemeString ps = orth_to_ipa(text, inv);
      for (std::int32_t elem : ps.elems)
        if (elem != PhonemeString::kWordBoundary)
          units.insert(inv.at(static_cast<std::size_t>(elem)).ipa);
    }
  }
  return TokenVocabulary(level,
                         std::vector<std::string>(units.begin(), units.end()));
}

TokenSequence encode(std::string_view text, const TokenVocabulary& vocab,
                     const PhonemeInventory& inv, bool allow_unk) {
  TokenSequence seq;
  seq.level = vocab.level();
  const auto push_unit = [&](const std::string& unit, std::size_t position) {
    const std::int32_t id = vocab.id_of(unit);
    if (id >= 0 && id >= static_cast<std::int32_t>(TokenVocabulary::kReservedCount)) {
      seq.ids.push_back(id);
    } else if (allow_unk) {
      seq.ids.push_back(TokenVocabulary::kUnkId);
    } else {
      throw OutOfVocabulary(unit, position);
    }
  };

  if (vocab.level() == TokenLevel::grapheme) {
    const auto clusters = utf8::grapheme_clusters(canonicalize_orth(text));
    bool pending_delim = false;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      const std::string& g = clusters[i];
      if (g == " " || g == "\t") {
        pending_delim = true;
        continue;
      }
      if (pending_delim && !seq.ids.empty())
        seq.ids.push_back(TokenVocabulary::kWordDelimId);
      pending_delim = false;
      push_unit(g, i);
    }
  } else {
    const PhonemeString ps = orth_to_ipa(text, inv);
    for (std::size_t i = 0; i < ps.elems.size(); ++i) {
      const std::int32_t elem = ps.elems[i];
      if (elem == PhonemeString::kWordBoundary)
        seq.ids.push_back(TokenVocabulary::kWordDelimId);
      else
        push_unit(inv.at(static_cast<std::size_t>(elem)).ipa, i);
    }
  }
  return seq;
}

std::string decode(const TokenSequence& seq, const TokenVocabulary& vocab) {
  std::string out;
  for (std::int32_t id : seq.ids) {
    if (id == TokenVocabulary::kBlankId || id == TokenVocabulary::kPadId)
      throw InvalidId(id);
    if (id == TokenVocabulary::kWordDelimId) {
      out += ' ';
      continue;
    }
    out += vocab.token(id);
  }
  return out;
}

}  // namespace ynk
