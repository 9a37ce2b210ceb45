// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fail. Library-level checks run in-process; pipeline-level checks drive the
// CLI binary passed via --cli.
//
//   acceptance --cli <path-to-ynkit> --work <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ynkit/corpus.hpp"
#include "ynkit/ctc.hpp"
#include "ynkit/errors.hpp"
#include "ynkit/evaluation.hpp"
#include "ynkit/model.hpp"
#include "ynkit/phonology.hpp"
#include "ynkit/rng.hpp"
#include "ynkit/tokenization.hpp"
#include "ynkit/train.hpp"

using namespace ynk;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool passed;
  std::string detail;
  double seconds;
};

std::vector<Criterion> g_results;

template <typename Fn>
void run_criterion(int id, const std::string& name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  bool passed = false;
  std::string detail;
  try {
    detail = fn();
    passed = true;
  } catch (const std::exception& e) {
    detail = e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  g_results.push_back({id, name, passed, detail, seconds});
  std::printf("%s  [%d] %s (%.1fs) %s\n", passed ? "PASS" : "FAIL", id,
              name.c_str(), seconds, detail.c_str());
  std::fflush(stdout);
}

struct Check {
  static void that(bool cond, const std::string& message) {
    if (!cond) throw std::runtime_error(message);
  }
};

std::string g_cli;
fs::path g_work;

int run_cli_process(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  Check::that(in.good(), "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. CTC oracle equivalence.

std::string criterion_ctc_oracle() {
  Rng rng(20250101);
  int tested = 0;
  double worst = 0.0;
  while (tested < 200) {
    const std::size_t t = 1 + rng.below(6);
    const std::size_t v = 2 + rng.below(3);
    LogitMatrix logits(t, v);
    for (double& x : logits.values) x = rng.uniform(-3.0, 3.0);
    std::vector<std::int32_t> label(rng.below(4));
    for (auto& id : label) id = 1 + static_cast<std::int32_t>(rng.below(v - 1));
    if (t < ctc_min_frames(label)) continue;
    const double oracle = ctc_loss_bruteforce(logits, label);
    const double dp = ctc_loss(logits, label).loss;
    const double rel = std::fabs(dp - oracle) / std::max(1.0, std::fabs(oracle));
    worst = std::max(worst, rel);
    Check::that(rel < 1e-10, "instance " + std::to_string(tested) +
                                 " rel err " + fmt(rel));
    ++tested;
  }
  return "200 instances, worst rel err " + fmt(worst);
}

// ---------------------------------------------------------------------------
// 2. Gradient checks.

std::string criterion_gradients() {
  Rng rng(20250202);
  const double h = 1e-5;
  double worst = 0.0;
  int tested = 0;
  while (tested < 50) {
    const std::size_t t = 1 + rng.below(5);
    const std::size_t v = 2 + rng.below(3);
    LogitMatrix logits(t, v);
    for (double& x : logits.values) x = rng.uniform(-2.0, 2.0);
    std::vector<std::int32_t> label(rng.below(4));
    for (auto& id : label) id = 1 + static_cast<std::int32_t>(rng.below(v - 1));
    if (t < ctc_min_frames(label)) continue;
    const CtcLossResult res = ctc_loss(logits, label);
    for (std::size_t i = 0; i < logits.values.size(); ++i) {
      const double saved = logits.values[i];
      logits.values[i] = saved + h;
      const double up = ctc_loss(logits, label).loss;
      logits.values[i] = saved - h;
      const double down = ctc_loss(logits, label).loss;
      logits.values[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double denom = std::max({1e-4, std::fabs(fd), std::fabs(res.grad[i])});
      worst = std::max(worst, std::fabs(fd - res.grad[i]) / denom);
    }
    ++tested;
  }
  Check::that(worst < 1e-4, "ctc grad worst rel err " + fmt(worst));

  // End-to-end model-parameter gradients on 10 instances.
  double worst_model = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    ModelConfig cfg;
    cfg.input_dim = 3;
    cfg.context = 1;
    cfg.hidden_dim = 4;
    cfg.vocab_size = 4;
    cfg.seed = 100 + static_cast<std::uint64_t>(trial);
    ModelParams params = ModelParams::init(cfg);
    FeatureMatrix feats(4 + static_cast<std::size_t>(trial % 3), 3);
    for (float& f : feats.data) f = static_cast<float>(rng.uniform(-1.0, 1.0));
    const std::vector<std::int32_t> label = {1, 2};
    Gradients grad(cfg);
    backward(params, feats, label, grad);
    const auto check_block = [&](std::vector<double>& block,
                                 const std::vector<double>& g) {
      for (std::size_t i = 0; i < block.size(); ++i) {
        const double saved = block[i];
        block[i] = saved + h;
        const double up = ctc_loss_value(forward(params, feats), label);
        block[i] = saved - h;
        const double down = ctc_loss_value(forward(params, feats), label);
        block[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({1e-4, std::fabs(fd), std::fabs(g[i])});
        worst_model = std::max(worst_model, std::fabs(fd - g[i]) / denom);
      }
    };
    check_block(params.w1, grad.w1);
    check_block(params.b1, grad.b1);
    check_block(params.w2, grad.w2);
    check_block(params.b2, grad.b2);
  }
  Check::that(worst_model < 1e-4, "model grad worst rel err " + fmt(worst_model));
  return "ctc worst " + fmt(worst) + ", model worst " + fmt(worst_model);
}

// ---------------------------------------------------------------------------
// 3. Levenshtein oracle.

std::size_t naive_distance(std::span<const std::string> ref,
                           std::span<const std::string> hyp) {
  if (ref.empty()) return hyp.size();
  if (hyp.empty()) return ref.size();
  const std::size_t sub = naive_distance(ref.subspan(1), hyp.subspan(1)) +
                          (ref[0] == hyp[0] ? 0 : 1);
  const std::size_t del = naive_distance(ref.subspan(1), hyp) + 1;
  const std::size_t ins = naive_distance(ref, hyp.subspan(1)) + 1;
  return std::min({sub, del, ins});
}

std::string criterion_levenshtein() {
  std::vector<std::vector<std::string>> all;
  all.push_back({});
  for (std::size_t len = 1; len <= 5; ++len) {
    std::vector<std::size_t> digits(len, 0);
    for (;;) {
      std::vector<std::string> s;
      for (std::size_t d : digits)
        s.push_back(std::string(1, static_cast<char>('a' + d)));
      all.push_back(std::move(s));
      std::size_t pos = 0;
      while (pos < len && ++digits[pos] == 3) digits[pos++] = 0;
      if (pos == len) break;
    }
  }
  std::size_t pairs = 0;
  for (const auto& ref : all)
    for (const auto& hyp : all) {
      const std::size_t dp = levenshtein_align(ref, hyp).distance();
      Check::that(dp == naive_distance(ref, hyp), "dp != naive recursion");
      ++pairs;
    }

  Rng rng(20250303);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> ref(rng.below(9)), hyp(rng.below(9));
    for (auto& tok : ref) tok = std::string(1, static_cast<char>('a' + rng.below(4)));
    for (auto& tok : hyp) tok = std::string(1, static_cast<char>('a' + rng.below(4)));
    const EditScript script = levenshtein_align(ref, hyp);
    std::vector<std::string> replayed;
    std::size_t i = 0;
    for (const EditOp& op : script.ops) {
      switch (op.type) {
        case EditType::Match: replayed.push_back(ref[i++]); break;
        case EditType::Substitute: replayed.push_back(op.hyp_tok); ++i; break;
        case EditType::Delete: ++i; break;
        case EditType::Insert: replayed.push_back(op.hyp_tok); break;
      }
    }
    Check::that(i == ref.size() && replayed == hyp,
                "edit script replay failed at trial " + std::to_string(trial));
  }
  return std::to_string(pairs) + " exhaustive pairs + 1000 replays";
}

// ---------------------------------------------------------------------------
// 4. Transducer round trips.

std::string criterion_transducer() {
  const PhonemeInventory& inv = PhonemeInventory::defaults();
  Check::that(inv.consonant_count() == 25, "consonant count != 25");
  Check::that(inv.vowel_count() == 6, "vowel count != 6");

  const auto is_canonical = [](const PhonemeString& ps) {
    for (std::size_t i = 0; i < ps.elems.size(); ++i) {
      if (ps.elems[i] != PhonemeString::kWordBoundary) continue;
      if (i == 0 || i + 1 == ps.elems.size()) return false;
      if (ps.elems[i + 1] == PhonemeString::kWordBoundary) return false;
    }
    return true;
  };

  // Exhaustive over canonical phoneme strings to length 4 (boundary
  // included as a symbol).
  const std::size_t n_symbols = inv.size() + 1;
  std::size_t exhaustive = 0;
  for (std::size_t len = 1; len <= 4; ++len) {
    std::vector<std::size_t> digits(len, 0);
    for (;;) {
      PhonemeString ps;
      for (std::size_t d : digits)
        ps.elems.push_back(d == inv.size() ? PhonemeString::kWordBoundary
                                           : static_cast<std::int32_t>(d));
      if (is_canonical(ps)) {
        const PhonemeString back = orth_to_ipa(ipa_to_orth(ps, inv), inv);
        Check::that(back == ps, "round trip failed at length " +
                                    std::to_string(len));
        ++exhaustive;
      }
      std::size_t pos = 0;
      while (pos < len && ++digits[pos] == n_symbols) digits[pos++] = 0;
      if (pos == len) break;
    }
  }

  Rng rng(20250404);
  for (int trial = 0; trial < 10000; ++trial) {
    PhonemeString ps;
    const std::size_t len = 1 + rng.below(40);
    for (std::size_t i = 0; i < len; ++i) {
      const bool boundary = !ps.elems.empty() &&
                            ps.elems.back() != PhonemeString::kWordBoundary &&
                            i + 1 < len && rng.below(6) == 0;
      ps.elems.push_back(boundary
                             ? PhonemeString::kWordBoundary
                             : static_cast<std::int32_t>(rng.below(inv.size())));
    }
    const PhonemeString back = orth_to_ipa(ipa_to_orth(ps, inv), inv);
    Check::that(back == ps, "random round trip failed at trial " +
                                std::to_string(trial));
  }
  return std::to_string(exhaustive) + " exhaustive + 10000 random strings";
}

// ---------------------------------------------------------------------------
// 5. Metric formula fixtures.

std::string criterion_metric_fixtures() {
  const PhonemeInventory& inv = PhonemeInventory::defaults();
  const double cer1 = cer("mana gurrku", "managurrku", Unit::grapheme, inv);
  Check::that(std::fabs(cer1 - 1.0 / 11.0) < 1e-15, "cer fixture 1: " + fmt(cer1));
  const double wer1 = wer("mana gurrku", "managurrku");
  Check::that(std::fabs(wer1 - 1.0) < 1e-15, "wer fixture: " + fmt(wer1));
  const double cer2 = cer("ḏiltji", "diltji", Unit::grapheme, inv);
  Check::that(std::fabs(cer2 - 1.0 / 6.0) < 1e-15, "cer fixture 2: " + fmt(cer2));
  return "cer 1/11, wer 1.0, cer 1/6";
}

// ---------------------------------------------------------------------------
// 6. Directional reproduction on the default synthetic corpus.

std::string criterion_direction() {
  const fs::path corpus = g_work / "corpus_default";
  const fs::path out = g_work / "ablation";
  Check::that(run_cli_process("synth --out " + corpus.string() + " --seed 1") == 0,
              "synth failed");
  Check::that(
      run_cli_process("ablation --manifest " + (corpus / "manifest.jsonl").string() +
                      " --out-dir " + out.string() +
                      " --seeds 1,2,3 --minutes 10,30,60,90,120,all" +
                      " --levels grapheme,phoneme --epochs 16 --lr 0.03") == 0,
      "ablation failed");

  // Parse the consolidated CSV.
  std::istringstream csv(slurp(out / "results.csv"));
  std::string line;
  std::getline(csv, line);
  Check::that(line == "minutes,level,seed,cer,wer,best_epoch,stopped_early",
              "csv header mismatch");
  std::map<std::string, std::map<std::string, std::vector<double>>> cers;
  std::vector<std::string> minute_order;
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string minutes, level, seed, cer_s;
    std::getline(ss, minutes, ',');
    std::getline(ss, level, ',');
    std::getline(ss, seed, ',');
    std::getline(ss, cer_s, ',');
    if (cers.find(minutes) == cers.end()) minute_order.push_back(minutes);
    cers[minutes][level].push_back(std::strtod(cer_s.c_str(), nullptr));
    ++rows;
  }
  Check::that(rows == 36, "expected 36 rows, got " + std::to_string(rows));

  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2]
                        : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };

  std::string summary;
  for (const std::string& m : minute_order) {
    const double p = median(cers[m]["phoneme"]);
    const double g = median(cers[m]["grapheme"]);
    summary += m + ":" + fmt(p) + "/" + fmt(g) + " ";
    if (m != "10")  // direction required at every grid point >= 30 minutes
      Check::that(p < g, "phoneme median cer " + fmt(p) +
                             " !< grapheme " + fmt(g) + " at " + m + " min");
  }
  // Learning-curve sanity: full data beats the smallest subset per level.
  for (const char* level : {"phoneme", "grapheme"})
    Check::that(median(cers["all"][level]) < median(cers["10"][level]),
                std::string(level) + " cer(all) !< cer(10)");
  return summary;
}

// ---------------------------------------------------------------------------
// 7. Table-3 schema consistency.

std::string criterion_schema() {
  // Over every per-cell evaluation report of the ablation run.
  const fs::path cells = g_work / "ablation" / "cells";
  Check::that(fs::exists(cells), "run criterion 6 first");
  std::size_t checked = 0;
  for (const auto& entry : fs::directory_iterator(cells)) {
    const fs::path report_path = entry.path() / "report.json";
    if (!fs::exists(report_path)) continue;
    const auto report = nlohmann::json::parse(slurp(report_path));
    const auto& s = report.at("summary");
    const std::size_t total = s.at("total").get<std::size_t>();
    Check::that(total == s.at("deletions").get<std::size_t>() +
                             s.at("insertions").get<std::size_t>() +
                             s.at("substitutions").get<std::size_t>(),
                "summary total mismatch in " + report_path.string());

    // Top-k tables sum to no more than the pooled counts.
    std::map<std::string, std::size_t> table_sums;
    std::istringstream csv(slurp(entry.path() / "errors.csv"));
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
      const std::size_t first = line.find(',');
      const std::size_t last = line.rfind(',');
      table_sums[line.substr(0, first)] +=
          std::strtoull(line.c_str() + last + 1, nullptr, 10);
    }
    Check::that(table_sums["deletion"] <= s.at("deletions").get<std::size_t>(),
                "deletion table exceeds summary");
    Check::that(table_sums["insertion"] <= s.at("insertions").get<std::size_t>(),
                "insertion table exceeds summary");
    Check::that(
        table_sums["substitution"] <= s.at("substitutions").get<std::size_t>(),
        "substitution table exceeds summary");
    ++checked;
  }
  Check::that(checked == 36, "expected 36 cell reports, got " +
                                 std::to_string(checked));
  return std::to_string(checked) + " cell reports consistent";
}

// ---------------------------------------------------------------------------
// 8. Determinism: byte-identical outputs for identical flags and seeds.

std::string compare_trees(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> rel;
  for (const auto& entry : fs::recursive_directory_iterator(a))
    if (entry.is_regular_file())
      rel.push_back(fs::relative(entry.path(), a));
  std::sort(rel.begin(), rel.end());
  for (const fs::path& r : rel) {
    Check::that(fs::exists(b / r), "missing in re-run: " + r.string());
    Check::that(slurp(a / r) == slurp(b / r), "differs: " + r.string());
  }
  return std::to_string(rel.size()) + " files";
}

std::string criterion_determinism() {
  const fs::path base = g_work / "determinism";
  fs::remove_all(base);
  fs::create_directories(base);

  const std::string synth_flags =
      " --seed 11 --words 16 --utterances 40 --dim 5 --noise 0.2";
  Check::that(run_cli_process("synth --out " + (base / "corpus_a").string() +
                              synth_flags) == 0, "synth a failed");
  Check::that(run_cli_process("synth --out " + (base / "corpus_b").string() +
                              synth_flags) == 0, "synth b failed");
  std::string files = compare_trees(base / "corpus_a", base / "corpus_b");

  const std::string manifest = (base / "corpus_a" / "manifest.jsonl").string();
  const std::string train_flags = " --manifest " + manifest +
                                  " --level phoneme --seed 3 --epochs 3"
                                  " --hidden-dim 12 --batch-size 4";
  Check::that(run_cli_process("train --out-dir " + (base / "run_a").string() +
                              train_flags) == 0, "train a failed");
  Check::that(run_cli_process("train --out-dir " + (base / "run_b").string() +
                              train_flags) == 0, "train b failed");
  files += ", " + compare_trees(base / "run_a", base / "run_b");

  const std::string eval_flags =
      " --checkpoint " + (base / "run_a" / "checkpoint.json").string() +
      " --manifest " + manifest + " --vocab " +
      (base / "run_a" / "vocab.json").string() + " --split " +
      (base / "run_a" / "split.json").string();
  Check::that(run_cli_process("eval --out-dir " + (base / "eval_a").string() +
                              eval_flags) == 0, "eval a failed");
  Check::that(run_cli_process("eval --out-dir " + (base / "eval_b").string() +
                              eval_flags) == 0, "eval b failed");
  files += ", " + compare_trees(base / "eval_a", base / "eval_b");

  const std::string abl_flags = " --manifest " + manifest +
                                " --seeds 1,2 --minutes 0.3,all"
                                " --levels grapheme,phoneme --epochs 2"
                                " --hidden-dim 8 --batch-size 4";
  Check::that(run_cli_process("ablation --out-dir " + (base / "abl_a").string() +
                              abl_flags) == 0, "ablation a failed");
  Check::that(run_cli_process("ablation --out-dir " + (base / "abl_b").string() +
                              abl_flags) == 0, "ablation b failed");
  files += ", " + compare_trees(base / "abl_a", base / "abl_b");
  return files;
}

// ---------------------------------------------------------------------------
// 9. Zero-noise sanity: CER reaches 0 within the 16-epoch cap.

std::string criterion_zero_noise() {
  const fs::path corpus_dir = g_work / "corpus_zero";
  SynthConfig cfg;
  cfg.seed = 2;
  cfg.lexicon_words = 50;
  cfg.utterances = 1200;
  cfg.dim = 32;
  cfg.noise = 0.0;
  const PhonemeInventory& inv = PhonemeInventory::defaults();
  generate_synthetic(cfg, inv, corpus_dir);
  const std::vector<Utterance> utts =
      apply_exclusions(load_manifest(corpus_dir / "manifest.jsonl"));
  const SplitManifest sm = split(utts, 1);
  std::map<std::string, const Utterance*> by_id;
  for (const Utterance& u : utts) by_id[u.id] = &u;
  std::vector<Utterance> train_utts, valid_utts;
  for (const auto& id : sm.train_ids) train_utts.push_back(*by_id.at(id));
  for (const auto& id : sm.valid_ids) valid_utts.push_back(*by_id.at(id));

  std::string detail;
  for (TokenLevel level : {TokenLevel::phoneme, TokenLevel::grapheme}) {
    std::vector<std::string> texts;
    for (const Utterance& u : utts) texts.push_back(u.orth);
    const TokenVocabulary vocab = build_vocab(texts, level, inv);

    ModelConfig mc;
    mc.input_dim = cfg.dim;
    mc.context = 2;
    mc.hidden_dim = 64;
    mc.vocab_size = vocab.size();
    mc.seed = 1;
    TrainConfig tc;
    tc.epochs = 16;
    tc.lr_init = 0.05;
    tc.batch_size = 2;
    tc.early_stop_patience = 3;
    tc.seed = 1;
    const TrainResult result =
        train(train_utts, valid_utts, vocab, inv, corpus_dir, mc, tc);
    const double best_cer =
        result.report.epochs[result.report.best_epoch - 1].valid_cer;
    detail += std::string(token_level_name(level)) + " cer " + fmt(best_cer) +
              " at epoch " + std::to_string(result.report.best_epoch) + "; ";
    Check::that(best_cer == 0.0, std::string(token_level_name(level)) +
                                     " best cer " + fmt(best_cer) + " != 0");
  }
  return detail;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") g_cli = argv[i + 1];
    if (flag == "--work") g_work = argv[i + 1];
  }
  if (g_cli.empty() || g_work.empty()) {
    std::cerr << "usage: acceptance --cli <ynkit binary> --work <scratch dir>\n";
    return 2;
  }
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  run_criterion(1, "ctc-oracle-equivalence", criterion_ctc_oracle);
  run_criterion(2, "ctc-and-model-gradient-checks", criterion_gradients);
  run_criterion(3, "levenshtein-oracle-and-replay", criterion_levenshtein);
  run_criterion(4, "transducer-round-trips", criterion_transducer);
  run_criterion(5, "metric-formula-fixtures", criterion_metric_fixtures);
  run_criterion(6, "phoneme-beats-grapheme-direction", criterion_direction);
  run_criterion(7, "error-summary-schema-consistency", criterion_schema);
  run_criterion(8, "byte-identical-reruns", criterion_determinism);
  run_criterion(9, "zero-noise-reaches-cer-zero", criterion_zero_noise);

  int failures = 0;
  for (const Criterion& c : g_results)
    if (!c.passed) ++failures;
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(g_results.size()) - failures, g_results.size());
  return failures == 0 ? 0 : 1;
}
