#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "ynkit/corpus.hpp"
#include "ynkit/errors.hpp"
#include "ynkit/features.hpp"
#include "ynkit/rng.hpp"
#include "ynkit/utf8.hpp"

using namespace ynk;
namespace fs = std::filesystem;

namespace {

const PhonemeInventory& inv() { return PhonemeInventory::defaults(); }

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ynkit_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

Utterance utt(const std::string& id, const std::string& orth, double dur) {
  Utterance u;
  u.id = id;
  u.orth = orth;
  u.duration_s = dur;
  u.feature_path = "features/" + id + ".ynf";
  return u;
}

}  // namespace

TEST_CASE("clean_text removes punctuation but keeps apostrophes") {
  CHECK(clean_text("Mana, gurrku!") == "mana gurrku");
  CHECK(clean_text("bawa'") == "bawa'");
  CHECK(clean_text("   ") == "");
  CHECK(clean_text("") == "");
  CHECK(clean_text("abc 123 def") == "abc def");
  CHECK(clean_text("“mana” — gurrku?") == "mana gurrku");
  CHECK(clean_text("bawa’") == "bawa'");  // typographic apostrophe
  CHECK(clean_text("Ŋanydja") == "ŋanydja");  // Ŋ lowercases
}

TEST_CASE("clean_text keeps the dot only between letters") {
  CHECK(clean_text("n.ya") == "n.ya");
  CHECK(clean_text("mana. gurrku") == "mana gurrku");
  CHECK(clean_text(".mana") == "mana");
  CHECK(clean_text("mana.") == "mana");
  CHECK(clean_text("a..b") == "a.b");
  CHECK(clean_text("a . b") == "a b");
}

TEST_CASE("clean_text is idempotent") {
  Rng rng(99);
  const std::string alphabet = "abn Ngh'.,!?123-äŋ’ \t";
  const auto alpha_cps = utf8::decode(alphabet);
  for (int trial = 0; trial < 300; ++trial) {
    std::string raw;
    const std::size_t len = rng.below(30);
    for (std::size_t i = 0; i < len; ++i)
      utf8::append(raw, alpha_cps[rng.below(alpha_cps.size())]);
    const std::string once = clean_text(raw);
    CHECK(clean_text(once) == once);
  }
}

TEST_CASE("manifest round trip and parse errors") {
  const fs::path dir = temp_dir("manifest");
  std::vector<Utterance> utts;
  utts.push_back(utt("u1", "mana gurrku", 1.5));
  utts.push_back(utt("u2", "diltji", 0.8));
  utts.back().speaker = "spk0";
  utts.push_back(utt("u3", "bad row", 2.0));
  utts.back().exclude = true;
  utts.back().exclude_reason = ExcludeReason::contains_english;

  write_manifest(utts, dir / "manifest.jsonl");
  const std::vector<Utterance> loaded = load_manifest(dir / "manifest.jsonl");
  REQUIRE(loaded.size() == 3);
  CHECK(loaded[0].id == "u1");
  CHECK(loaded[1].speaker == std::optional<std::string>("spk0"));
  CHECK(loaded[2].exclude);
  CHECK(loaded[2].exclude_reason == ExcludeReason::contains_english);

  // Re-writing what was loaded is byte-identical.
  write_manifest(loaded, dir / "again.jsonl");
  CHECK(slurp(dir / "manifest.jsonl") == slurp(dir / "again.jsonl"));

  std::ofstream bad(dir / "bad.jsonl");
  bad << R"({"id":"x","orth":"a","duration_s":1.0,"feature_path":"f"})" << "\n";
  bad << "not json\n";
  bad.close();
  try {
    load_manifest(dir / "bad.jsonl");
    FAIL("expected ManifestParseError");
  } catch (const ManifestParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("apply_exclusions filters flags and empty transcripts") {
  std::vector<Utterance> utts;
  utts.push_back(utt("u1", "Mana!", 30.0));
  utts.push_back(utt("u2", "ok text", 60.0));
  utts.back().exclude = true;
  utts.back().exclude_reason = ExcludeReason::contains_english;
  utts.push_back(utt("u3", "  ?! ", 15.0));  // cleans to empty

  CorpusStats stats;
  const std::vector<Utterance> kept = apply_exclusions(utts, &stats);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].orth == "mana");
  CHECK(stats.kept == 1);
  CHECK(stats.excluded_flagged == 1);
  CHECK(stats.excluded_empty == 1);
  // Total minutes recomputed independently.
  CHECK(stats.total_minutes == doctest::Approx(30.0 / 60.0));
}

TEST_CASE("split: 80/20 with floor, deterministic") {
  std::vector<Utterance> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(utt("u" + std::to_string(i), "a", 1.0));
  const SplitManifest m = split(ten, 7);
  CHECK(m.train_ids.size() == 8);
  CHECK(m.valid_ids.size() == 2);

  const SplitManifest again = split(ten, 7);
  CHECK(m.train_ids == again.train_ids);
  CHECK(m.valid_ids == again.valid_ids);
  CHECK(split(ten, 8).train_ids != m.train_ids);  // different seed, different order

  std::set<std::string> all(m.train_ids.begin(), m.train_ids.end());
  all.insert(m.valid_ids.begin(), m.valid_ids.end());
  CHECK(all.size() == 10);

  std::vector<Utterance> five(ten.begin(), ten.begin() + 5);
  const SplitManifest m5 = split(five, 1);
  CHECK(m5.train_ids.size() == 4);
  CHECK(m5.valid_ids.size() == 1);

  std::vector<Utterance> one(ten.begin(), ten.begin() + 1);
  CHECK_THROWS_AS(split(one, 1), TooFewUtterances);
}

TEST_CASE("split manifest json round trip") {
  std::vector<Utterance> utts;
  for (int i = 0; i < 6; ++i) utts.push_back(utt("u" + std::to_string(i), "a", 1.0));
  const SplitManifest m = split(utts, 41);
  const fs::path dir = temp_dir("split");
  m.to_json_file(dir / "split.json");
  const SplitManifest loaded = SplitManifest::from_json_file(dir / "split.json");
  CHECK(loaded.train_ids == m.train_ids);
  CHECK(loaded.valid_ids == m.valid_ids);
  CHECK(loaded.seed == m.seed);
}

TEST_CASE("subset_by_minutes: nested, minimal, deterministic") {
  std::vector<Utterance> utts;
  for (int i = 0; i < 40; ++i)
    utts.push_back(utt("u" + std::to_string(i), "a", 30.0));  // 0.5 min each

  const SubsetResult s5 = subset_by_minutes(utts, 5.0, 3);
  const SubsetResult s10 = subset_by_minutes(utts, 10.0, 3);
  CHECK(s5.actual_minutes >= 5.0);
  CHECK_FALSE(s5.exhausted);
  // Minimal prefix: dropping the last utterance goes below the request.
  CHECK(s5.actual_minutes - s5.utts.back().duration_s / 60.0 < 5.0);
  // Nested under the same seed.
  REQUIRE(s5.utts.size() <= s10.utts.size());
  for (std::size_t i = 0; i < s5.utts.size(); ++i)
    CHECK(s5.utts[i].id == s10.utts[i].id);

  const SubsetResult all = subset_by_minutes(utts, 1000.0, 3);
  CHECK(all.utts.size() == utts.size());
  CHECK(all.exhausted);
  CHECK(all.actual_minutes == doctest::Approx(20.0));

  const SubsetResult again = subset_by_minutes(utts, 5.0, 3);
  REQUIRE(again.utts.size() == s5.utts.size());
  for (std::size_t i = 0; i < s5.utts.size(); ++i)
    CHECK(again.utts[i].id == s5.utts[i].id);
}

TEST_CASE("feature files round trip bit-exactly") {
  const fs::path dir = temp_dir("features");
  Rng rng(5);
  FeatureMatrix m(7, 3);
  for (float& v : m.data) v = static_cast<float>(rng.uniform(-4.0, 4.0));
  write_features(m, dir / "x.ynf");
  const FeatureMatrix back = read_features(dir / "x.ynf");
  CHECK(back.frames == m.frames);
  CHECK(back.dim == m.dim);
  CHECK(back.data == m.data);
  CHECK(back.duration_seconds() == doctest::Approx(0.07));

  std::ofstream bad(dir / "bad.ynf", std::ios::binary);
  bad << "XXXX";
  bad.close();
  CHECK_THROWS_AS(read_features(dir / "bad.ynf"), IoError);
}

TEST_CASE("synthetic corpus: deterministic, parseable, digraph-rich") {
  SynthConfig cfg;
  cfg.seed = 11;
  cfg.lexicon_words = 24;
  cfg.utterances = 30;
  cfg.dim = 4;
  cfg.noise = 0.25;

  const fs::path dir_a = temp_dir("synth_a");
  const fs::path dir_b = temp_dir("synth_b");
  const SynthResult a = generate_synthetic(cfg, inv(), dir_a);
  const SynthResult b = generate_synthetic(cfg, inv(), dir_b);

  CHECK(a.n_utterances == 30);
  CHECK(slurp(dir_a / "manifest.jsonl") == slurp(dir_b / "manifest.jsonl"));
  CHECK(slurp(dir_a / "synth_meta.json") == slurp(dir_b / "synth_meta.json"));
  CHECK(slurp(dir_a / "features/utt000000.ynf") ==
        slurp(dir_b / "features/utt000000.ynf"));

  // Lexicon: distinct words, at least a quarter carrying a digraph phoneme.
  std::set<std::string> distinct(a.lexicon.begin(), a.lexicon.end());
  CHECK(distinct.size() == a.lexicon.size());
  std::size_t digraph_words = 0;
  for (const std::string& w : a.lexicon) {
    bool has = false;
    for (std::int32_t e : orth_to_ipa(w, inv()).elems)
      if (e != PhonemeString::kWordBoundary &&
          utf8::grapheme_clusters(inv().at(e).orth).size() >= 2)
        has = true;
    if (has) ++digraph_words;
  }
  CHECK(digraph_words * 4 >= a.lexicon.size());

  const std::vector<Utterance> utts = load_manifest(a.manifest_path);
  double total_minutes = 0.0;
  for (const Utterance& u : utts) {
    CHECK_NOTHROW(orth_to_ipa(u.orth, inv()));
    const FeatureMatrix f = read_features(dir_a / u.feature_path);
    CHECK(u.duration_s == doctest::Approx(f.frames * 0.01));
    total_minutes += u.duration_s / 60.0;
  }
  CHECK(total_minutes == doctest::Approx(a.total_minutes));
}

TEST_CASE("zero-noise frames equal their prototypes exactly") {
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.lexicon_words = 12;
  cfg.utterances = 10;
  cfg.dim = 5;
  cfg.noise = 0.0;

  const fs::path dir = temp_dir("synth_zero");
  const SynthResult res = generate_synthetic(cfg, inv(), dir);

  // Nearest-prototype oracle over the prototypes recorded in the metadata.
  std::ifstream meta_in(dir / "synth_meta.json");
  REQUIRE(meta_in.good());
  const auto meta = nlohmann::json::parse(meta_in);
  const auto protos =
      meta.at("prototypes").get<std::vector<std::vector<double>>>();
  REQUIRE(protos.size() == inv().size() + 1);

  const std::vector<Utterance> utts = load_manifest(res.manifest_path);
  const std::size_t silence = inv().size();
  for (const Utterance& u : utts) {
    const FeatureMatrix f = read_features(dir / u.feature_path);
    // Frame-level labels by exact prototype match.
    std::vector<std::size_t> frame_labels;
    for (std::size_t t = 0; t < f.frames; ++t) {
      std::size_t match = protos.size();
      for (std::size_t p = 0; p < protos.size(); ++p) {
        bool equal = true;
        for (std::size_t d = 0; d < f.dim; ++d)
          if (f.row(t)[d] != static_cast<float>(protos[p][d])) {
            equal = false;
            break;
          }
        if (equal) {
          match = p;
          break;
        }
      }
      REQUIRE(match < protos.size());  // 100% frame accuracy at sigma = 0
      frame_labels.push_back(match);
    }
    // Collapsed frame labels reproduce the transcript's phoneme sequence
    // with silence at the edges and between words.
    std::vector<std::size_t> collapsed;
    for (std::size_t t = 0; t < frame_labels.size(); ++t)
      if (t == 0 || frame_labels[t] != frame_labels[t - 1])
        collapsed.push_back(frame_labels[t]);

    std::vector<std::size_t> expected;
    for (std::int32_t e : orth_to_ipa(u.orth, inv()).elems)
      expected.push_back(e == PhonemeString::kWordBoundary
                             ? silence
                             : static_cast<std::size_t>(e));
    // Adjacent repeats merge in the collapse, so merge them here too.
    std::vector<std::size_t> expected_collapsed;
    for (std::size_t i = 0; i < expected.size(); ++i)
      if (i == 0 || expected[i] != expected[i - 1])
        expected_collapsed.push_back(expected[i]);
    CHECK(collapsed == expected_collapsed);
  }
}

TEST_CASE("bad synth config is rejected") {
  SynthConfig cfg;
  cfg.lexicon_words = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg, inv(), temp_dir("synth_bad")), Error);
}
