#include "ynkit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ynkit/errors.hpp"
#include "ynkit/features.hpp"
#include "ynkit/rng.hpp"
#include "ynkit/utf8.hpp"

namespace ynk {

namespace {

using json = nlohmann::ordered_json;

bool is_space_cp(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
         cp == U'\f' || cp == U'\v' || cp == 0x00A0;
}

// Punctuation/digits dropped by clean_text. Apostrophe and the separator
// survive; everything else here goes.
bool is_removed_cp(char32_t cp) {
  if (cp >= U'0' && cp <= U'9') return true;
  if (cp < 0x80) {
    const char c = static_cast<char>(cp);
    static const std::string ascii_punct = "!\"#$%&()*+,-/:;<=>?@[\\]^_`{|}~";
    return ascii_punct.find(c) != std::string::npos;
  }
  switch (cp) {
    case 0x2018: case 0x201C: case 0x201D: case 0x2013:
    case 0x2014: case 0x2026: case 0x00AB: case 0x00BB:
    case 0x00A1: case 0x00BF:
      return true;
    default:
      return false;
  }
}

}  // namespace

const char* exclude_reason_name(ExcludeReason r) {
  switch (r) {
    case ExcludeReason::incomplete: return "incomplete";
    case ExcludeReason::contains_english: return "contains_english";
    case ExcludeReason::empty: return "empty";
    case ExcludeReason::none: return "none";
  }
  return "none";
}

ExcludeReason exclude_reason_from(std::string_view name) {
  if (name == "incomplete") return ExcludeReason::incomplete;
  if (name == "contains_english") return ExcludeReason::contains_english;
  if (name == "empty") return ExcludeReason::empty;
  if (name == "none") return ExcludeReason::none;
  throw Error("invalid_manifest", "unknown exclude_reason: " + std::string(name));
}

std::string clean_text(std::string_view raw) {
  const std::string canon = canonicalize_orth(lowercase_orth(raw));
  const std::u32string cps = utf8::decode(canon);
  constexpr char32_t kSep = U'.';
  std::u32string out;
  out.reserve(cps.size());

  const auto is_letter = [](char32_t cp) {
    return !is_space_cp(cp) && cp != kSep && !is_removed_cp(cp) && cp != 0x2019;
  };

  for (std::size_t i = 0; i < cps.size(); ++i) {
    char32_t cp = cps[i];
    if (cp == 0x2019) cp = U'\'';  // typographic apostrophes mark glottal stops too
    if (is_space_cp(cp)) {
      if (!out.empty() && out.back() != U' ') out += U' ';
      continue;
    }
    if (cp == kSep) {
      // The dot is kept only where it works as a segmentation separator:
      // directly between two letters.
      const bool prev_letter = !out.empty() && is_letter(out.back());
      const bool next_letter = i + 1 < cps.size() && is_letter(cps[i + 1]);
      if (prev_letter && next_letter) out += kSep;
      continue;
    }
    if (is_removed_cp(cp)) continue;
    out += cp;
  }
  while (!out.empty() && out.back() == U' ') out.pop_back();
  return utf8::encode(out);
}

std::vector<Utterance> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::vector<Utterance> utts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw ManifestParseError(line_no, e.what());
    }
    try {
      Utterance u;
      u.id = row.at("id").get<std::string>();
      u.orth = row.at("orth").get<std::string>();
      u.duration_s = row.at("duration_s").get<double>();
      u.feature_path = row.at("feature_path").get<std::string>();
      if (row.contains("speaker")) u.speaker = row["speaker"].get<std::string>();
      if (row.contains("exclude")) u.exclude = row["exclude"].get<bool>();
      if (row.contains("exclude_reason"))
        u.exclude_reason = exclude_reason_from(row["exclude_reason"].get<std::string>());
      if (u.id.empty()) throw ManifestParseError(line_no, "empty id");
      if (!(u.duration_s > 0.0))
        throw ManifestParseError(line_no, "duration_s must be > 0");
      utts.push_back(std::move(u));
    } catch (const json::exception& e) {
      throw ManifestParseError(line_no, e.what());
    }
  }
  return utts;
}

void write_manifest(const std::vector<Utterance>& utts,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const Utterance& u : utts) {
    json row;
    row["id"] = u.id;
    row["orth"] = u.orth;
    row["duration_s"] = u.duration_s;
    row["feature_path"] = u.feature_path;
    if (u.speaker) row["speaker"] = *u.speaker;
    if (u.exclude) row["exclude"] = true;
    if (u.exclude_reason != ExcludeReason::none)
      row["exclude_reason"] = exclude_reason_name(u.exclude_reason);
    out << row.dump() << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

std::vector<Utterance> apply_exclusions(const std::vector<Utterance>& utts,
                                        CorpusStats* stats) {
  std::vector<Utterance> kept;
  CorpusStats s;
  for (const Utterance& u : utts) {
    if (u.exclude) {
      ++s.excluded_flagged;
      continue;
    }
    std::string cleaned = clean_text(u.orth);
    if (cleaned.empty()) {
      ++s.excluded_empty;
      continue;
    }
    Utterance copy = u;
    copy.orth = std::move(cleaned);
    s.total_minutes += copy.duration_s / 60.0;
    kept.push_back(std::move(copy));
  }
  s.kept = kept.size();
  if (stats) *stats = s;
  return kept;
}

std::string SplitManifest::to_json_string() const {
  json root;
  root["version"] = 1;
  root["seed"] = seed;
  root["train_ids"] = train_ids;
  root["valid_ids"] = valid_ids;
  return root.dump(2) + "\n";
}

void SplitManifest::to_json_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << to_json_string();
  if (!out) throw IoError(path.string(), "write failed");
}

SplitManifest SplitManifest::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  json root;
  try {
    root = json::parse(in);
    SplitManifest m;
    if (root.at("version").get<int>() != 1)
      throw VersionUnsupported(root.at("version").get<long long>());
    m.seed = root.at("seed").get<std::uint64_t>();
    m.train_ids = root.at("train_ids").get<std::vector<std::string>>();
    m.valid_ids = root.at("valid_ids").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw Error("invalid_split", std::string("bad split json: ") + e.what());
  }
}

SplitManifest split(const std::vector<Utterance>& utts, std::uint64_t seed,
                    double train_frac) {
  if (utts.size() < 2) throw TooFewUtterances(utts.size());
  if (!(train_frac > 0.0 && train_frac < 1.0 + 1e-12))
    throw Error("invalid_argument", "train_frac must be in (0, 1]");
  std::vector<std::size_t> order(utts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_frac * static_cast<double>(utts.size()) + 1e-9));
  SplitManifest m;
  m.seed = seed;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? m.train_ids : m.valid_ids).push_back(utts[order[i]].id);
  }
  return m;
}

SubsetResult subset_by_minutes(const std::vector<Utterance>& utts,
                               double minutes, std::uint64_t seed) {
  if (!(minutes > 0.0)) throw Error("invalid_argument", "minutes must be > 0");
  std::vector<std::size_t> order(utts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  SubsetResult result;
  double cum_minutes = 0.0;
  for (std::size_t idx : order) {
    if (cum_minutes >= minutes) break;
    result.utts.push_back(utts[idx]);
    cum_minutes += utts[idx].duration_s / 60.0;
  }
  result.actual_minutes = cum_minutes;
  result.exhausted = cum_minutes < minutes;
  return result;
}

namespace {

std::vector<double> unit_norm_vector(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm_sq = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm_sq += x * x;
  }
  const double inv_norm = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv_norm;
  return v;
}

bool has_digraph_spelling(const std::vector<std::int32_t>& word,
                          const std::vector<bool>& is_digraph) {
  for (std::int32_t p : word)
    if (is_digraph[static_cast<std::size_t>(p)]) return true;
  return false;
}

}  // namespace

SynthResult generate_synthetic(const SynthConfig& cfg,
                               const PhonemeInventory& inv,
                               const std::filesystem::path& out_dir) {
  if (cfg.lexicon_words < 1 || cfg.dim < 2 || cfg.noise < 0.0 ||
      cfg.utterances < 1 || cfg.digraph_fraction < 0.0 ||
      cfg.digraph_fraction > 1.0)
    throw Error("invalid_argument", "bad synthetic corpus config");

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "features", ec);
  if (ec) throw IoError((out_dir / "features").string(), ec.message());

  std::vector<std::size_t> consonants, vowels;
  std::vector<bool> is_digraph(inv.size(), false);
  for (std::size_t i = 0; i < inv.size(); ++i) {
    if (inv.at(i).kind == PhonemeKind::consonant) consonants.push_back(i);
    else vowels.push_back(i);
    is_digraph[i] = utf8::grapheme_clusters(inv.at(i).orth).size() >= 2;
  }
  if (consonants.empty() || vowels.empty())
    throw Error("invalid_argument", "inventory needs consonants and vowels");

  Rng rng_lex(Rng::mix(cfg.seed, 1));
  Rng rng_proto(Rng::mix(cfg.seed, 2));
  Rng rng_utt(Rng::mix(cfg.seed, 3));

  const auto make_word = [&](Rng& rng) {
    std::vector<std::int32_t> word;
    const std::int64_t n_syll = rng.range(2, 4);
    for (std::int64_t s = 0; s < n_syll; ++s) {
      const bool closed = rng.below(2) == 1;  // CV or CVC
      word.push_back(static_cast<std::int32_t>(
          consonants[rng.below(consonants.size())]));
      word.push_back(static_cast<std::int32_t>(vowels[rng.below(vowels.size())]));
      if (closed)
        word.push_back(static_cast<std::int32_t>(
            consonants[rng.below(consonants.size())]));
    }
    return word;
  };

  // Lexicon: distinct words, the first ceil(fraction*W) of them forced to
  // carry a digraph-spelled phoneme; words whose spelling would need a
  // separator are rejected to keep transcripts alphabetic, and geminates
  // (adjacent identical phonemes at syllable junctions) are rejected so
  // every label is realizable from frame-local evidence.
  const std::size_t need_digraph = static_cast<std::size_t>(
      std::ceil(cfg.digraph_fraction * static_cast<double>(cfg.lexicon_words) - 1e-9));
  const auto has_geminate = [](const std::vector<std::int32_t>& word) {
    for (std::size_t i = 1; i < word.size(); ++i)
      if (word[i] == word[i - 1]) return true;
    return false;
  };
  std::vector<std::vector<std::int32_t>> lexicon_phonemes;
  std::vector<std::string> lexicon_orth;
  std::set<std::string> seen;
  for (std::size_t w = 0; w < cfg.lexicon_words; ++w) {
    bool accepted = false;
    for (int attempt = 0; attempt < 10000 && !accepted; ++attempt) {
      std::vector<std::int32_t> word = make_word(rng_lex);
      if (has_geminate(word)) continue;
      if (w < need_digraph && !has_digraph_spelling(word, is_digraph)) continue;
      PhonemeString ps;
      ps.elems = word;
      std::string orth = ipa_to_orth(ps, inv);
      if (orth.find(inv.separator()) != std::string::npos) continue;
      if (!seen.insert(orth).second) continue;
      lexicon_phonemes.push_back(std::move(word));
      lexicon_orth.push_back(std::move(orth));
      accepted = true;
    }
    if (!accepted)
      throw Error("lexicon_exhausted",
                  "could not sample a distinct word; reduce lexicon_words");
  }

  // Unit-norm prototypes: one per phoneme, in inventory order, plus a final
  // one for word-boundary silence.
  std::vector<std::vector<double>> prototypes;
  for (std::size_t i = 0; i < inv.size() + 1; ++i)
    prototypes.push_back(unit_norm_vector(rng_proto, cfg.dim));
  const std::size_t silence = inv.size();

  std::vector<Utterance> manifest;
  double total_minutes = 0.0;
  char id_buf[32];
  for (std::size_t u = 0; u < cfg.utterances; ++u) {
    std::snprintf(id_buf, sizeof(id_buf), "utt%06zu", u);
    const std::string id(id_buf);

    const std::int64_t n_words = rng_utt.range(1, 6);
    std::vector<std::size_t> word_ids;
    for (std::int64_t i = 0; i < n_words; ++i)
      word_ids.push_back(rng_utt.below(lexicon_phonemes.size()));

    // Word-boundary silence only; no lead or trail segments, so every
    // silence stretch corresponds to a word delimiter in the label.
    std::string orth;
    std::vector<std::pair<std::size_t, std::int64_t>> segments;  // proto, frames
    for (std::size_t i = 0; i < word_ids.size(); ++i) {
      if (i > 0) {
        orth += ' ';
        segments.emplace_back(silence, rng_utt.range(2, 4));
      }
      orth += lexicon_orth[word_ids[i]];
      for (std::int32_t p : lexicon_phonemes[word_ids[i]])
        segments.emplace_back(static_cast<std::size_t>(p), rng_utt.range(3, 8));
    }

    std::int64_t total_frames = 0;
    for (const auto& [proto, n] : segments) total_frames += n;
    FeatureMatrix feats(static_cast<std::size_t>(total_frames), cfg.dim);
    std::size_t t = 0;
    for (const auto& [proto, n] : segments) {
      for (std::int64_t f = 0; f < n; ++f, ++t) {
        float* row = feats.row(t);
        for (std::size_t d = 0; d < cfg.dim; ++d)
          row[d] = static_cast<float>(prototypes[proto][d] +
                                      cfg.noise * rng_utt.normal());
      }
    }

    const std::string rel_path = "features/" + id + ".ynf";
    write_features(feats, out_dir / rel_path);

    Utterance utt;
    utt.id = id;
    utt.orth = std::move(orth);
    utt.duration_s = feats.duration_seconds();
    utt.feature_path = rel_path;
    total_minutes += utt.duration_s / 60.0;
    manifest.push_back(std::move(utt));
  }

  const std::filesystem::path manifest_path = out_dir / "manifest.jsonl";
  write_manifest(manifest, manifest_path);

  json meta;
  meta["version"] = 1;
  meta["config"] = {{"seed", cfg.seed},
                    {"lexicon_words", cfg.lexicon_words},
                    {"utterances", cfg.utterances},
                    {"dim", cfg.dim},
                    {"noise", cfg.noise},
                    {"digraph_fraction", cfg.digraph_fraction}};
  meta["lexicon"] = lexicon_orth;
  meta["n_utterances"] = manifest.size();
  meta["total_minutes"] = total_minutes;
  json protos = json::array();
  for (const auto& p : prototypes) protos.push_back(p);
  meta["prototypes"] = std::move(protos);
  std::ofstream meta_out(out_dir / "synth_meta.json", std::ios::binary);
  if (!meta_out) throw IoError((out_dir / "synth_meta.json").string(), "cannot open");
  meta_out << meta.dump(2) << '\n';
  if (!meta_out) throw IoError((out_dir / "synth_meta.json").string(), "write failed");

  SynthResult result;
  result.manifest_path = manifest_path;
  result.n_utterances = manifest.size();
  result.total_minutes = total_minutes;
  result.lexicon = std::move(lexicon_orth);
  return result;
}

}  // namespace ynk
