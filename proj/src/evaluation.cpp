#include "ynkit/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ynkit/errors.hpp"
#include "ynkit/utf8.hpp"

namespace ynk {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kBoundaryUnit = "_";

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (c == ' ' || c == '\t') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

// Words from a unit sequence: split on the boundary unit, join the rest.
std::vector<std::string> words_from_units(const std::vector<std::string>& units) {
  std::vector<std::string> words;
  std::string cur;
  for (const std::string& u : units) {
    if (u == kBoundaryUnit) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += u;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

// Pools alignments across utterance pairs and builds the report.
class Aggregator {
 public:
  void add(const std::vector<std::string>& ref_units,
           const std::vector<std::string>& hyp_units, std::size_t index) {
    if (ref_units.empty()) throw EmptyReference(index);
    const EditScript script = levenshtein_align(ref_units, hyp_units);
    for (const EditOp& op : script.ops) {
      switch (op.type) {
        case EditType::Match: break;
        case EditType::Substitute: ++subs_[{op.ref_tok, op.hyp_tok}]; break;
        case EditType::Delete: ++dels_[op.ref_tok]; break;
        case EditType::Insert: ++inss_[op.hyp_tok]; break;
      }
    }
    edit_count_ += script.distance();
    unit_count_ += ref_units.size();
    del_count_ += script.deletions;
    ins_count_ += script.insertions;
    sub_count_ += script.substitutions;

    const std::vector<std::string> ref_words = words_from_units(ref_units);
    const std::vector<std::string> hyp_words = words_from_units(hyp_units);
    if (ref_words.empty()) throw EmptyReference(index);
    word_edit_count_ += levenshtein_distance<std::string>(ref_words, hyp_words);
    word_count_ += ref_words.size();
    ++n_;
  }

  ErrorReport finalize(std::size_t top_k, std::string model_label) const {
    ErrorReport report;
    report.model_label = std::move(model_label);
    report.n_utts = n_;
    report.cer = unit_count_ == 0
                     ? 0.0
                     : static_cast<double>(edit_count_) / static_cast<double>(unit_count_);
    report.wer = word_count_ == 0
                     ? 0.0
                     : static_cast<double>(word_edit_count_) / static_cast<double>(word_count_);
    report.summary.model_label = report.model_label;
    report.summary.deletions = del_count_;
    report.summary.insertions = ins_count_;
    report.summary.substitutions = sub_count_;

    report.deletions.kind = EditType::Delete;
    for (const auto& [tok, count] : dels_)
      report.deletions.rows.push_back({tok, "", count});
    report.insertions.kind = EditType::Insert;
    for (const auto& [tok, count] : inss_)
      report.insertions.rows.push_back({"", tok, count});
    report.substitutions.kind = EditType::Substitute;
    for (const auto& [pair, count] : subs_)
      report.substitutions.rows.push_back({pair.first, pair.second, count});

    for (ErrorFrequencyTable* table :
         {&report.deletions, &report.insertions, &report.substitutions}) {
      std::stable_sort(table->rows.begin(), table->rows.end(),
                       [](const FrequencyRow& a, const FrequencyRow& b) {
                         if (a.count != b.count) return a.count > b.count;
                         if (a.ref_tok != b.ref_tok) return a.ref_tok < b.ref_tok;
                         return a.hyp_tok < b.hyp_tok;
                       });
      if (table->rows.size() > top_k) table->rows.resize(top_k);
    }
    return report;
  }

 private:
  std::map<std::string, std::size_t> dels_, inss_;
  std::map<std::pair<std::string, std::string>, std::size_t> subs_;
  std::size_t edit_count_ = 0, unit_count_ = 0;
  std::size_t word_edit_count_ = 0, word_count_ = 0;
  std::size_t del_count_ = 0, ins_count_ = 0, sub_count_ = 0;
  std::size_t n_ = 0;
};

std::string render_token(const TokenVocabulary& vocab,
                         const PhonemeInventory& inv, std::int32_t id) {
  if (id == TokenVocabulary::kWordDelimId) return kBoundaryUnit;
  const std::string& tok = vocab.token(id);
  if (vocab.level() == TokenLevel::phoneme) {
    const int idx = inv.find_by_ipa(tok);
    if (idx >= 0) return inv.at(static_cast<std::size_t>(idx)).display;
  }
  return tok;
}

std::vector<std::string> render_ids(std::span<const std::int32_t> ids,
                                    const TokenVocabulary& vocab,
                                    const PhonemeInventory& inv) {
  std::vector<std::string> units;
  units.reserve(ids.size());
  for (std::int32_t id : ids) units.push_back(render_token(vocab, inv, id));
  return units;
}

}  // namespace

EditScript levenshtein_align(std::span<const std::string> ref,
                             std::span<const std::string> hyp) {
  const std::size_t m = ref.size(), n = hyp.size();
  std::vector<std::size_t> d((m + 1) * (n + 1));
  const auto at = [&](std::size_t i, std::size_t j) -> std::size_t& {
    return d[i * (n + 1) + j];
  };
  for (std::size_t i = 0; i <= m; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= n; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t sub = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({sub, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }

  EditScript script;
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] &&
        at(i, j) == at(i - 1, j - 1)) {
      script.ops.push_back({EditType::Match, ref[i - 1], hyp[j - 1]});
      --i, --j;
    } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1 &&
               ref[i - 1] != hyp[j - 1]) {
      script.ops.push_back({EditType::Substitute, ref[i - 1], hyp[j - 1]});
      --i, --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      script.ops.push_back({EditType::Delete, ref[i - 1], ""});
      --i;
    } else {
      script.ops.push_back({EditType::Insert, "", hyp[j - 1]});
      --j;
    }
  }
  std::reverse(script.ops.begin(), script.ops.end());
  for (const EditOp& op : script.ops) {
    switch (op.type) {
      case EditType::Match: ++script.matches; break;
      case EditType::Substitute: ++script.substitutions; break;
      case EditType::Delete: ++script.deletions; break;
      case EditType::Insert: ++script.insertions; break;
    }
  }
  return script;
}

const char* unit_name(Unit u) {
  return u == Unit::grapheme ? "grapheme" : "phoneme";
}

Unit unit_from(std::string_view name) {
  if (name == "grapheme") return Unit::grapheme;
  if (name == "phoneme") return Unit::phoneme;
  throw Error("invalid_argument", "unknown unit: " + std::string(name));
}

std::vector<std::string> units_of(std::string_view text, Unit unit,
                                  const PhonemeInventory& inv, bool lenient) {
  std::vector<std::string> units;
  if (unit == Unit::grapheme) {
    for (const std::string& g : utf8::grapheme_clusters(canonicalize_orth(text)))
      units.push_back((g == " " || g == "\t") ? kBoundaryUnit : g);
    return units;
  }
  if (!lenient) {
    const PhonemeString ps = orth_to_ipa(text, inv);
    for (std::int32_t elem : ps.elems)
      units.push_back(elem == PhonemeString::kWordBoundary
                          ? kBoundaryUnit
                          : inv.at(static_cast<std::size_t>(elem)).display);
    return units;
  }
  // Lenient scan: unparseable clusters pass through verbatim.
  const std::u32string cps = utf8::decode(canonicalize_orth(text));
  std::size_t i = 0;
  while (i < cps.size()) {
    const char32_t cp = cps[i];
    if (cp == U' ' || cp == U'\t') {
      units.push_back(kBoundaryUnit);
      ++i;
      continue;
    }
    if (cp == inv.separator_cp()) {
      ++i;
      continue;
    }
    int best = -1;
    std::size_t best_len = 0;
    const std::size_t limit = std::min(inv.max_orth_cps(), cps.size() - i);
    for (std::size_t len = limit; len >= 1; --len) {
      const int idx = inv.find_by_orth(cps.substr(i, len));
      if (idx >= 0) {
        best = idx;
        best_len = len;
        break;
      }
    }
    if (best >= 0) {
      units.push_back(inv.at(static_cast<std::size_t>(best)).display);
      i += best_len;
    } else {
      std::u32string cluster(1, cps[i]);
      ++i;
      while (i < cps.size() && utf8::is_combining_mark(cps[i]))
        cluster.push_back(cps[i++]);
      units.push_back(utf8::encode(cluster));
    }
  }
  return units;
}

double cer(std::string_view ref, std::string_view hyp, Unit unit,
           const PhonemeInventory& inv) {
  const std::vector<std::string> ref_units = units_of(ref, unit, inv);
  if (ref_units.empty()) throw EmptyReference();
  const std::vector<std::string> hyp_units =
      units_of(hyp, unit, inv, /*lenient=*/true);
  const std::size_t dist =
      levenshtein_distance<std::string>(ref_units, hyp_units);
  return static_cast<double>(dist) / static_cast<double>(ref_units.size());
}

double wer(std::string_view ref, std::string_view hyp) {
  const std::vector<std::string> ref_words = split_words(ref);
  if (ref_words.empty()) throw EmptyReference();
  const std::vector<std::string> hyp_words = split_words(hyp);
  const std::size_t dist =
      levenshtein_distance<std::string>(ref_words, hyp_words);
  return static_cast<double>(dist) / static_cast<double>(ref_words.size());
}

std::string ErrorReport::to_json_string() const {
  json root;
  root["model"] = model_label;
  root["cer"] = cer;
  root["wer"] = wer;
  root["n_utts"] = n_utts;
  root["summary"] = {{"deletions", summary.deletions},
                     {"insertions", summary.insertions},
                     {"substitutions", summary.substitutions},
                     {"total", summary.total()}};
  return root.dump(2) + "\n";
}

void ErrorReport::to_json_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << to_json_string();
  if (!out) throw IoError(path.string(), "write failed");
}

std::string ErrorReport::tables_to_csv() const {
  std::string csv = "kind,ref_token,hyp_token,count\n";
  const auto emit = [&](const char* kind, const ErrorFrequencyTable& table) {
    for (const FrequencyRow& row : table.rows) {
      csv += kind;
      csv += ',';
      csv += row.ref_tok;
      csv += ',';
      csv += row.hyp_tok;
      csv += ',';
      csv += std::to_string(row.count);
      csv += '\n';
    }
  };
  emit("deletion", deletions);
  emit("insertion", insertions);
  emit("substitution", substitutions);
  return csv;
}

void ErrorReport::tables_to_csv_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << tables_to_csv();
  if (!out) throw IoError(path.string(), "write failed");
}

ErrorReport error_frequencies(
    std::span<const std::pair<std::string, std::string>> pairs, Unit unit,
    const PhonemeInventory& inv, std::size_t top_k, std::string model_label) {
  Aggregator agg;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [ref, hyp] = pairs[i];
    const std::vector<std::string> ref_units = units_of(ref, unit, inv);
    if (ref_units.empty()) throw EmptyReference(i);
    const std::vector<std::string> hyp_units =
        units_of(hyp, unit, inv, /*lenient=*/true);
    agg.add(ref_units, hyp_units, i);
  }
  return agg.finalize(top_k, std::move(model_label));
}

ErrorReport evaluate_model(const ModelParams& params,
                           const std::vector<Utterance>& utts,
                           const TokenVocabulary& vocab,
                           const PhonemeInventory& inv,
                           const std::filesystem::path& feature_root,
                           const EvalOptions& options) {
  if (options.common_space_ipa && vocab.level() == TokenLevel::phoneme)
    throw Error("invalid_argument",
                "common_space=ipa only applies to grapheme-level models");
  const std::int32_t forbidden[] = {TokenVocabulary::kPadId};

  Aggregator agg;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    const Utterance& utt = utts[i];
    const std::filesystem::path fpath = feature_root / utt.feature_path;
    if (!std::filesystem::exists(fpath)) throw MissingFeatureFile(utt.id);
    const FeatureMatrix feats = read_features(fpath);
    const LogitMatrix logits = forward(params, feats);
    const DecodeResult decoded =
        options.strategy == DecodeStrategy::greedy
            ? greedy_decode(logits, forbidden)
            : beam_decode(logits, options.beam_width, forbidden);

    std::vector<std::string> ref_units, hyp_units;
    if (options.common_space_ipa) {
      ref_units = units_of(utt.orth, Unit::phoneme, inv);
      TokenSequence hyp_seq{decoded.ids, vocab.level()};
      const std::string hyp_text = decode(hyp_seq, vocab);
      hyp_units = units_of(hyp_text, Unit::phoneme, inv, /*lenient=*/true);
    } else {
      const TokenSequence ref_seq = encode(utt.orth, vocab, inv, /*allow_unk=*/true);
      ref_units = render_ids(ref_seq.ids, vocab, inv);
      hyp_units = render_ids(decoded.ids, vocab, inv);
    }
    agg.add(ref_units, hyp_units, i);
  }
  std::string label = token_level_name(vocab.level());
  if (options.common_space_ipa) label += "+common_ipa";
  return agg.finalize(options.top_k, std::move(label));
}

}  // namespace ynk
