#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ynk {

// Base class for all toolkit errors. code() is a stable machine-readable
// identifier; the CLI turns it into structured stderr diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct UnrecognizedGrapheme : Error {
  UnrecognizedGrapheme(std::size_t position_, std::string fragment_)
      : Error("unrecognized_grapheme",
              "no inventory spelling matches at position " +
                  std::to_string(position_) + ": \"" + fragment_ + "\""),
        position(position_),
        fragment(std::move(fragment_)) {}
  std::size_t position;  // code-point index into the canonicalized input
  std::string fragment;
};

struct UnknownPhoneme : Error {
  explicit UnknownPhoneme(std::size_t index_)
      : Error("unknown_phoneme",
              "phoneme at sequence index " + std::to_string(index_) +
                  " is not in the inventory"),
        index(index_) {}
  std::size_t index;
};

struct OutOfVocabulary : Error {
  OutOfVocabulary(std::string unit_, std::size_t position_)
      : Error("out_of_vocabulary",
              "unit \"" + unit_ + "\" at position " +
                  std::to_string(position_) + " is not in the vocabulary"),
        unit(std::move(unit_)),
        position(position_) {}
  std::string unit;
  std::size_t position;
};

struct InvalidId : Error {
  explicit InvalidId(long long id_)
      : Error("invalid_id", "token id " + std::to_string(id_) +
                                " is not decodable"),
        id(id_) {}
  long long id;
};

struct ManifestParseError : Error {
  ManifestParseError(std::size_t line_, const std::string& detail)
      : Error("manifest_parse_error",
              "manifest line " + std::to_string(line_) + ": " + detail),
        line(line_) {}
  std::size_t line;  // 1-based
};

struct MissingFeatureFile : Error {
  explicit MissingFeatureFile(std::string id_)
      : Error("missing_feature_file",
              "feature file for utterance \"" + id_ + "\" does not exist"),
        id(std::move(id_)) {}
  std::string id;
};

struct TooFewUtterances : Error {
  explicit TooFewUtterances(std::size_t count_)
      : Error("too_few_utterances",
              "need at least 2 utterances to split, got " +
                  std::to_string(count_)),
        count(count_) {}
  std::size_t count;
};

struct InfeasibleLabel : Error {
  InfeasibleLabel(std::size_t frames_, std::size_t needed_,
                  std::string utterance_id_ = {})
      : Error("infeasible_label",
              (utterance_id_.empty() ? std::string()
                                     : "utterance \"" + utterance_id_ + "\": ") +
                  "label needs at least " + std::to_string(needed_) +
                  " frames, logits have " + std::to_string(frames_)),
        frames(frames_),
        needed(needed_),
        utterance_id(std::move(utterance_id_)) {}
  std::size_t frames;
  std::size_t needed;
  std::string utterance_id;
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& detail)
      : Error("dimension_mismatch", detail) {}
};

struct TooLargeForOracle : Error {
  TooLargeForOracle(std::size_t frames_, std::size_t vocab_)
      : Error("too_large_for_oracle",
              "exhaustive enumeration bound exceeded: T=" +
                  std::to_string(frames_) + ", V=" + std::to_string(vocab_)),
        frames(frames_),
        vocab(vocab_) {}
  std::size_t frames;
  std::size_t vocab;
};

struct EmptyReference : Error {
  explicit EmptyReference(std::size_t index_ = 0)
      : Error("empty_reference",
              "reference at index " + std::to_string(index_) +
                  " has no units"),
        index(index_) {}
  std::size_t index;
};

struct EmptySplit : Error {
  explicit EmptySplit(const std::string& which)
      : Error("empty_split", which + " split has no utterances") {}
};

struct ChecksumMismatch : Error {
  ChecksumMismatch() : Error("checksum_mismatch", "checkpoint checksum does not match contents") {}
};

struct VersionUnsupported : Error {
  explicit VersionUnsupported(long long version_)
      : Error("version_unsupported",
              "file version " + std::to_string(version_) + " is not supported"),
        version(version_) {}
  long long version;
};

struct VocabFingerprintMismatch : Error {
  VocabFingerprintMismatch()
      : Error("vocab_fingerprint_mismatch",
              "checkpoint was trained with a different vocabulary") {}
};

struct IoError : Error {
  IoError(std::string path_, const std::string& detail)
      : Error("io_error", path_ + ": " + detail), path(std::move(path_)) {}
  std::string path;
};

}  // namespace ynk
