#include "ynkit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ynkit/corpus.hpp"
#include "ynkit/errors.hpp"
#include "ynkit/evaluation.hpp"
#include "ynkit/features.hpp"
#include "ynkit/model.hpp"
#include "ynkit/phonology.hpp"
#include "ynkit/tokenization.hpp"
#include "ynkit/train.hpp"

namespace ynk {

namespace {

using json = nlohmann::ordered_json;

// Shortest round-trip decimal, locale-independent.
std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

PhonemeInventory load_inventory(const std::string& path) {
  if (path.empty()) return PhonemeInventory::defaults();
  return PhonemeInventory::from_json_file(path);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

std::size_t worker_threads() {
  if (const char* env = std::getenv("YNKIT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::size_t feature_dim_of(const std::filesystem::path& root,
                           const std::vector<Utterance>& utts) {
  if (utts.empty()) throw EmptySplit("corpus");
  const std::filesystem::path path = root / utts.front().feature_path;
  if (!std::filesystem::exists(path)) throw MissingFeatureFile(utts.front().id);
  return read_features(path).dim;
}

std::vector<Utterance> select_ids(const std::vector<Utterance>& utts,
                                  const std::vector<std::string>& ids) {
  std::unordered_map<std::string, const Utterance*> by_id;
  for (const Utterance& u : utts) by_id[u.id] = &u;
  std::vector<Utterance> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw Error("invalid_split", "split id not in manifest: " + id);
    out.push_back(*it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// convert

struct ConvertOptions {
  std::string to;
  std::string in_path;
  std::string out_path;
  std::string inventory;
};

int cmd_convert(const ConvertOptions& opt) {
  const PhonemeInventory inv = load_inventory(opt.inventory);
  const std::vector<std::string> lines = read_lines(opt.in_path);
  std::string output;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      if (opt.to == "ipa") {
        const std::string cleaned = clean_text(lines[i]);
        output += ipa_string(orth_to_ipa(cleaned, inv), inv, " ");
      } else {
        output += ipa_to_orth(parse_ipa(lines[i], inv), inv);
      }
      output += '\n';
    } catch (const UnrecognizedGrapheme& e) {
      ++failures;
      json diag;
      diag["error"] = e.code();
      diag["line"] = i + 1;
      diag["column"] = e.position + 1;
      diag["fragment"] = e.fragment;
      diag["message"] = e.what();
      std::cerr << diag.dump() << '\n';
    }
  }
  if (failures > 0) {
    std::cout << "convert: " << failures << " of " << lines.size()
              << " lines failed; no output written\n";
    return 1;
  }
  write_text(opt.out_path, output);
  std::cout << "convert: wrote " << lines.size() << " lines to " << opt.out_path
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// tokenize

struct TokenizeOptions {
  std::string manifest;
  std::string level = "phoneme";
  std::string out_path;
  std::string encode_out;
  std::string inventory;
};

int cmd_tokenize(const TokenizeOptions& opt) {
  const PhonemeInventory inv = load_inventory(opt.inventory);
  const std::vector<Utterance> utts =
      apply_exclusions(load_manifest(opt.manifest));
  std::vector<std::string> texts;
  texts.reserve(utts.size());
  for (const Utterance& u : utts) texts.push_back(u.orth);
  const TokenVocabulary vocab =
      build_vocab(texts, token_level_from(opt.level), inv);
  vocab.to_json_file(opt.out_path);
  if (!opt.encode_out.empty()) {
    std::string out;
    for (const Utterance& u : utts) {
      json row;
      row["id"] = u.id;
      row["ids"] = encode(u.orth, vocab, inv).ids;
      out += row.dump();
      out += '\n';
    }
    write_text(opt.encode_out, out);
  }
  std::cout << "tokenize: " << vocab.size() << " tokens (" << opt.level
            << ") from " << utts.size() << " utterances -> " << opt.out_path
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string out_dir;
  SynthConfig cfg;
  std::string inventory;
};

int cmd_synth(const SynthOptions& opt) {
  const PhonemeInventory inv = load_inventory(opt.inventory);
  const SynthResult result = generate_synthetic(opt.cfg, inv, opt.out_dir);
  std::cout << "synth: " << result.n_utterances << " utterances, "
            << format_double(result.total_minutes) << " minutes -> "
            << result.manifest_path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string manifest;
  std::string level = "phoneme";
  std::string out_dir;
  std::string vocab_path;
  std::string inventory;
  std::uint64_t seed = 1;
  double minutes = 0.0;  // 0 = use the whole train side
  double train_frac = 0.8;
  std::size_t epochs = 16;
  double lr = 0.03;
  std::size_t batch_size = 8;
  std::size_t patience = 3;
  std::size_t hidden_dim = 64;
  std::size_t context = 2;
};

int cmd_train(const TrainOptions& opt) {
  const PhonemeInventory inv = load_inventory(opt.inventory);
  const std::filesystem::path manifest_path(opt.manifest);
  const std::filesystem::path feature_root = manifest_path.parent_path();
  const std::vector<Utterance> utts =
      apply_exclusions(load_manifest(manifest_path));

  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path out_dir(opt.out_dir);

  const TokenLevel level = token_level_from(opt.level);
  TokenVocabulary vocab = [&] {
    if (!opt.vocab_path.empty())
      return TokenVocabulary::from_json_file(opt.vocab_path);
    std::vector<std::string> texts;
    texts.reserve(utts.size());
    for (const Utterance& u : utts) texts.push_back(u.orth);
    return build_vocab(texts, level, inv);
  }();
  if (vocab.level() != level)
    throw Error("invalid_vocab", "vocabulary level does not match --level");
  vocab.to_json_file(out_dir / "vocab.json");

  const SplitManifest split_manifest = split(utts, opt.seed, opt.train_frac);
  split_manifest.to_json_file(out_dir / "split.json");

  std::vector<Utterance> train_utts = select_ids(utts, split_manifest.train_ids);
  const std::vector<Utterance> valid_utts =
      select_ids(utts, split_manifest.valid_ids);
  std::string subset_note;
  if (opt.minutes > 0.0) {
    SubsetResult subset = subset_by_minutes(train_utts, opt.minutes, opt.seed);
    subset_note = " (subset " + format_double(subset.actual_minutes) + " min" +
                  (subset.exhausted ? ", corpus exhausted" : "") + ")";
    train_utts = std::move(subset.utts);
  }

  ModelConfig model_config;
  model_config.input_dim = feature_dim_of(feature_root, train_utts);
  model_config.context = opt.context;
  model_config.hidden_dim = opt.hidden_dim;
  model_config.vocab_size = vocab.size();
  model_config.seed = opt.seed;

  TrainConfig train_config;
  train_config.epochs = opt.epochs;
  train_config.lr_init = opt.lr;
  train_config.batch_size = opt.batch_size;
  train_config.early_stop_patience = opt.patience;
  train_config.seed = opt.seed;

  const TrainResult result = train(train_utts, valid_utts, vocab, inv,
                                   feature_root, model_config, train_config);
  save_checkpoint(result.best, vocab.fingerprint(), out_dir / "checkpoint.json");
  result.report.to_json_file(out_dir / "train_report.json");

  std::cout << result.report.to_table();
  const EpochStats& best =
      result.report.epochs[result.report.best_epoch - 1];
  std::cout << "train: " << opt.level << ", " << train_utts.size()
            << " train / " << valid_utts.size() << " valid utterances"
            << subset_note << ", best epoch " << result.report.best_epoch
            << " (cer " << format_double(best.valid_cer) << ") -> "
            << (out_dir / "checkpoint.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalCmdOptions {
  std::string checkpoint;
  std::string manifest;
  std::string vocab_path;
  std::string split_path;
  std::string part = "valid";
  std::string decode = "greedy";
  std::size_t beam_width = 8;
  bool common_space_ipa = false;
  std::size_t top_k = 20;
  std::string out_dir;
  std::string inventory;
};

int cmd_eval(const EvalCmdOptions& opt) {
  const PhonemeInventory inv = load_inventory(opt.inventory);
  const std::filesystem::path manifest_path(opt.manifest);
  const std::filesystem::path feature_root = manifest_path.parent_path();
  const std::vector<Utterance> all_utts =
      apply_exclusions(load_manifest(manifest_path));
  const TokenVocabulary vocab = TokenVocabulary::from_json_file(opt.vocab_path);
  const ModelParams params = load_checkpoint(opt.checkpoint, vocab);

  std::vector<Utterance> utts;
  if (!opt.split_path.empty()) {
    const SplitManifest sm = SplitManifest::from_json_file(opt.split_path);
    if (opt.part == "train") utts = select_ids(all_utts, sm.train_ids);
    else if (opt.part == "valid") utts = select_ids(all_utts, sm.valid_ids);
    else throw Error("invalid_argument", "part must be train or valid");
  } else {
    utts = all_utts;
  }

  EvalOptions eval_options;
  eval_options.strategy = opt.decode == "beam" ? DecodeStrategy::beam
                                               : DecodeStrategy::greedy;
  eval_options.beam_width = opt.beam_width;
  eval_options.common_space_ipa = opt.common_space_ipa;
  eval_options.top_k = opt.top_k;

  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path out_dir(opt.out_dir);
  const ErrorReport report =
      evaluate_model(params, utts, vocab, inv, feature_root, eval_options);
  report.to_json_file(out_dir / "report.json");
  report.tables_to_csv_file(out_dir / "errors.csv");

  std::cout << "eval: " << report.n_utts << " utterances, cer "
            << format_double(report.cer) << ", wer "
            << format_double(report.wer) << " -> "
            << (out_dir / "report.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// errors

struct ErrorsOptions {
  std::string pairs_path;
  std::string unit = "grapheme";
  std::size_t top_k = 20;
  std::string out_dir;
  std::string label;
  std::string inventory;
};

int cmd_errors(const ErrorsOptions& opt) {
  const PhonemeInventory inv = load_inventory(opt.inventory);
  std::vector<std::pair<std::string, std::string>> pairs;
  const std::vector<std::string> lines = read_lines(opt.pairs_path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    if (line.front() == '{') {
      try {
        const json row = json::parse(line);
        pairs.emplace_back(clean_text(row.at("ref").get<std::string>()),
                           clean_text(row.at("hyp").get<std::string>()));
      } catch (const json::exception& e) {
        throw Error("invalid_pairs",
                    "line " + std::to_string(i + 1) + ": " + e.what());
      }
    } else {
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw Error("invalid_pairs", "line " + std::to_string(i + 1) +
                                         ": expected ref<TAB>hyp");
      pairs.emplace_back(clean_text(line.substr(0, tab)),
                         clean_text(line.substr(tab + 1)));
    }
  }

  const ErrorReport report = error_frequencies(pairs, unit_from(opt.unit), inv,
                                               opt.top_k, opt.label);
  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path out_dir(opt.out_dir);
  report.to_json_file(out_dir / "report.json");
  report.tables_to_csv_file(out_dir / "errors.csv");
  std::cout << "errors: " << report.n_utts << " pairs, cer "
            << format_double(report.cer) << ", total edits "
            << report.summary.total() << " -> "
            << (out_dir / "report.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// ablation

struct AblationOptions {
  std::string manifest;
  std::string out_dir;
  std::string seeds = "1,2,3";
  std::string minutes = "10,30,60,90,120,all";
  std::string levels = "grapheme,phoneme";
  double train_frac = 0.8;
  std::size_t epochs = 16;
  double lr = 0.03;
  std::size_t batch_size = 8;
  std::size_t patience = 3;
  std::size_t hidden_dim = 64;
  std::size_t context = 2;
  std::string inventory;
};

struct Cell {
  double minutes = 0.0;  // +inf for "all"
  std::string minutes_label;
  TokenLevel level = TokenLevel::grapheme;
  std::uint64_t seed = 0;
};

struct CellResult {
  double cer = 0.0;
  double wer = 0.0;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

int cmd_ablation(const AblationOptions& opt) {
  const PhonemeInventory inv = load_inventory(opt.inventory);
  const std::filesystem::path manifest_path(opt.manifest);
  const std::filesystem::path feature_root = manifest_path.parent_path();
  const std::vector<Utterance> utts =
      apply_exclusions(load_manifest(manifest_path));
  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path out_dir(opt.out_dir);

  // Grid.
  std::vector<std::pair<double, std::string>> minute_grid;
  for (const std::string& m : split_csv(opt.minutes)) {
    if (m == "all") {
      minute_grid.emplace_back(std::numeric_limits<double>::infinity(), m);
    } else {
      const double v = std::strtod(m.c_str(), nullptr);
      if (!(v > 0.0))
        throw Error("invalid_argument", "minutes grid values must be > 0");
      minute_grid.emplace_back(v, m);
    }
  }
  if (minute_grid.empty())
    throw Error("invalid_argument", "minutes grid is empty");
  for (std::size_t i = 1; i < minute_grid.size(); ++i)
    if (!(minute_grid[i - 1].first < minute_grid[i].first))
      throw Error("invalid_argument", "minutes grid must be ascending");

  std::vector<TokenLevel> levels;
  for (const std::string& l : split_csv(opt.levels))
    levels.push_back(token_level_from(l));
  std::vector<std::uint64_t> seeds;
  for (const std::string& s : split_csv(opt.seeds))
    seeds.push_back(std::strtoull(s.c_str(), nullptr, 10));
  if (levels.empty() || seeds.empty())
    throw Error("invalid_argument", "levels and seeds must be non-empty");

  // One vocabulary per level, shared across the grid.
  std::vector<std::string> texts;
  texts.reserve(utts.size());
  for (const Utterance& u : utts) texts.push_back(u.orth);
  std::map<TokenLevel, TokenVocabulary> vocabs;
  for (TokenLevel level : levels) {
    TokenVocabulary v = build_vocab(texts, level, inv);
    v.to_json_file(out_dir / ("vocab_" + std::string(token_level_name(level)) +
                              ".json"));
    vocabs.emplace(level, std::move(v));
  }

  const std::size_t input_dim = feature_dim_of(feature_root, utts);

  std::vector<Cell> cells;
  for (std::uint64_t seed : seeds)
    for (TokenLevel level : levels)
      for (const auto& [minutes, label] : minute_grid)
        cells.push_back({minutes, label, level, seed});

  const auto run_cell = [&](const Cell& cell) -> CellResult {
    const TokenVocabulary& vocab = vocabs.at(cell.level);
    const SplitManifest sm = split(utts, cell.seed, opt.train_frac);
    std::vector<Utterance> train_utts = select_ids(utts, sm.train_ids);
    const std::vector<Utterance> valid_utts = select_ids(utts, sm.valid_ids);
    if (std::isfinite(cell.minutes))
      train_utts =
          subset_by_minutes(train_utts, cell.minutes, cell.seed).utts;

    ModelConfig model_config;
    model_config.input_dim = input_dim;
    model_config.context = opt.context;
    model_config.hidden_dim = opt.hidden_dim;
    model_config.vocab_size = vocab.size();
    model_config.seed = cell.seed;

    TrainConfig train_config;
    train_config.epochs = opt.epochs;
    train_config.lr_init = opt.lr;
    train_config.batch_size = opt.batch_size;
    train_config.early_stop_patience = opt.patience;
    train_config.seed = cell.seed;

    const TrainResult trained = train(train_utts, valid_utts, vocab, inv,
                                      feature_root, model_config, train_config);

    const std::filesystem::path cell_dir =
        out_dir / "cells" /
        (cell.minutes_label + "min_" + token_level_name(cell.level) + "_seed" +
         std::to_string(cell.seed));
    std::filesystem::create_directories(cell_dir);
    save_checkpoint(trained.best, vocab.fingerprint(),
                    cell_dir / "checkpoint.json");
    trained.report.to_json_file(cell_dir / "train_report.json");

    const ErrorReport report =
        evaluate_model(trained.best, valid_utts, vocab, inv, feature_root);
    report.to_json_file(cell_dir / "report.json");
    report.tables_to_csv_file(cell_dir / "errors.csv");

    CellResult result;
    result.cer = report.cer;
    result.wer = report.wer;
    result.best_epoch = trained.report.best_epoch;
    result.stopped_early = trained.report.stopped_early;
    return result;
  };

  // Cells are independent; run them on a small worker pool.
  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t n_workers = std::min(worker_threads(), cells.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size() || failed.load()) return;
        try {
          results[i] = run_cell(cells[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  // Consolidated CSV, sorted by (minutes, level, seed).
  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cells[a].minutes != cells[b].minutes)
      return cells[a].minutes < cells[b].minutes;
    const std::string la = token_level_name(cells[a].level);
    const std::string lb = token_level_name(cells[b].level);
    if (la != lb) return la < lb;
    return cells[a].seed < cells[b].seed;
  });
  std::string csv = "minutes,level,seed,cer,wer,best_epoch,stopped_early\n";
  for (std::size_t i : order) {
    const Cell& cell = cells[i];
    const CellResult& r = results[i];
    csv += cell.minutes_label;
    csv += ',';
    csv += token_level_name(cell.level);
    csv += ',';
    csv += std::to_string(cell.seed);
    csv += ',';
    csv += format_double(r.cer);
    csv += ',';
    csv += format_double(r.wer);
    csv += ',';
    csv += std::to_string(r.best_epoch);
    csv += ',';
    csv += r.stopped_early ? "true" : "false";
    csv += '\n';
  }
  write_text(out_dir / "results.csv", csv);
  std::cout << "ablation: " << cells.size() << " cells -> "
            << (out_dir / "results.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
  std::string ablation_csv;
  std::string train_report;
};

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int cmd_report(const ReportOptions& opt) {
  if (!opt.train_report.empty()) {
    std::ifstream in(opt.train_report, std::ios::binary);
    if (!in) throw IoError(opt.train_report, "cannot open");
    json root;
    try {
      root = json::parse(in);
    } catch (const json::exception& e) {
      throw Error("invalid_report", e.what());
    }
    TrainReport report;
    report.best_epoch = root.at("best_epoch").get<std::size_t>();
    report.stopped_early = root.at("stopped_early").get<bool>();
    for (const json& row : root.at("epochs")) {
      EpochStats e;
      e.train_loss = row.at("train_loss").get<double>();
      e.valid_loss = row.at("valid_loss").get<double>();
      e.valid_cer = row.at("valid_cer").get<double>();
      e.valid_wer = row.at("valid_wer").get<double>();
      e.lr = row.at("lr").get<double>();
      report.epochs.push_back(e);
    }
    std::cout << report.to_table();
    return 0;
  }

  const std::vector<std::string> lines = read_lines(opt.ablation_csv);
  if (lines.empty() || lines[0] != "minutes,level,seed,cer,wer,best_epoch,stopped_early")
    throw Error("invalid_report", "not an ablation results csv");
  // (minutes label, level) -> cer/wer samples across seeds.
  std::map<std::string, std::map<std::string, std::pair<std::vector<double>,
                                                        std::vector<double>>>>
      groups;
  std::vector<std::string> minute_order;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> f = split_csv(lines[i]);
    if (f.size() != 7)
      throw Error("invalid_report", "bad csv row: " + lines[i]);
    if (groups.find(f[0]) == groups.end()) minute_order.push_back(f[0]);
    auto& [cers, wers] = groups[f[0]][f[1]];
    cers.push_back(std::strtod(f[3].c_str(), nullptr));
    wers.push_back(std::strtod(f[4].c_str(), nullptr));
  }
  std::cout << "minutes     level  median_cer  median_wer  seeds\n";
  char buf[128];
  for (const std::string& m : minute_order) {
    for (const auto& [level, samples] : groups[m]) {
      std::snprintf(buf, sizeof(buf), "%7s  %8s  %10.4f  %10.4f  %5zu\n",
                    m.c_str(), level.c_str(), median(samples.first),
                    median(samples.second), samples.first.size());
      std::cout << buf;
    }
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Low-resource speech recognition toolkit for the Yan-nhangu "
               "orthography: transduction, tokenization, synthetic corpora, "
               "CTC training, and error analysis."};
  app.require_subcommand(1);

  ConvertOptions convert_opt;
  CLI::App* convert = app.add_subcommand(
      "convert", "Convert a text file between orthography and IPA");
  convert->add_option("--to", convert_opt.to, "Target form")
      ->required()
      ->check(CLI::IsMember({"ipa", "orth"}));
  convert->add_option("--in", convert_opt.in_path, "Input text file")->required();
  convert->add_option("--out", convert_opt.out_path, "Output text file")->required();
  convert->add_option("--inventory", convert_opt.inventory,
                      "Inventory JSON (default: built-in)");

  TokenizeOptions tokenize_opt;
  CLI::App* tokenize = app.add_subcommand(
      "tokenize", "Build a token vocabulary from a manifest");
  tokenize->add_option("--manifest", tokenize_opt.manifest, "Manifest JSONL")
      ->required();
  tokenize->add_option("--level", tokenize_opt.level, "Token level")
      ->check(CLI::IsMember({"grapheme", "phoneme"}));
  tokenize->add_option("--out", tokenize_opt.out_path, "Vocabulary JSON output")
      ->required();
  tokenize->add_option("--encode-out", tokenize_opt.encode_out,
                       "Also write encoded id sequences (JSONL)");
  tokenize->add_option("--inventory", tokenize_opt.inventory,
                       "Inventory JSON (default: built-in)");

  SynthOptions synth_opt;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a seeded synthetic corpus with feature files");
  synth->add_option("--out", synth_opt.out_dir, "Output directory")->required();
  synth->add_option("--seed", synth_opt.cfg.seed, "Random seed");
  synth->add_option("--words", synth_opt.cfg.lexicon_words, "Lexicon size");
  synth->add_option("--utterances", synth_opt.cfg.utterances, "Utterance count");
  synth->add_option("--dim", synth_opt.cfg.dim, "Feature dimension");
  synth->add_option("--noise", synth_opt.cfg.noise, "Feature noise sigma");
  synth->add_option("--digraph-fraction", synth_opt.cfg.digraph_fraction,
                    "Minimum fraction of lexicon words with a digraph phoneme");
  synth->add_option("--inventory", synth_opt.inventory,
                    "Inventory JSON (default: built-in)");

  TrainOptions train_opt;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "Train a frame classifier with CTC on a manifest");
  train_cmd->add_option("--manifest", train_opt.manifest, "Manifest JSONL")->required();
  train_cmd->add_option("--level", train_opt.level, "Token level")
      ->check(CLI::IsMember({"grapheme", "phoneme"}));
  train_cmd->add_option("--out-dir", train_opt.out_dir, "Output directory")->required();
  train_cmd->add_option("--vocab", train_opt.vocab_path,
                        "Reuse an existing vocabulary JSON");
  train_cmd->add_option("--seed", train_opt.seed, "Random seed");
  train_cmd->add_option("--minutes", train_opt.minutes,
                        "Limit training data to this many minutes (0 = all)");
  train_cmd->add_option("--train-frac", train_opt.train_frac, "Train fraction");
  train_cmd->add_option("--epochs", train_opt.epochs, "Epoch cap");
  train_cmd->add_option("--lr", train_opt.lr, "Initial learning rate");
  train_cmd->add_option("--batch-size", train_opt.batch_size, "Utterances per batch");
  train_cmd->add_option("--patience", train_opt.patience,
                        "Early-stop patience in epochs (0 = off)");
  train_cmd->add_option("--hidden-dim", train_opt.hidden_dim, "Hidden layer width");
  train_cmd->add_option("--context", train_opt.context, "Context frames per side");
  train_cmd->add_option("--inventory", train_opt.inventory,
                        "Inventory JSON (default: built-in)");

  EvalCmdOptions eval_opt;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Evaluate a checkpoint: CER/WER and error tables");
  eval_cmd->add_option("--checkpoint", eval_opt.checkpoint, "Checkpoint JSON")->required();
  eval_cmd->add_option("--manifest", eval_opt.manifest, "Manifest JSONL")->required();
  eval_cmd->add_option("--vocab", eval_opt.vocab_path, "Vocabulary JSON")->required();
  eval_cmd->add_option("--split", eval_opt.split_path,
                       "Split JSON; evaluates the chosen part");
  eval_cmd->add_option("--part", eval_opt.part, "train or valid")
      ->check(CLI::IsMember({"train", "valid"}));
  eval_cmd->add_option("--decode", eval_opt.decode, "Decoding strategy")
      ->check(CLI::IsMember({"greedy", "beam"}));
  eval_cmd->add_option("--beam-width", eval_opt.beam_width, "Beam width");
  eval_cmd->add_flag("--common-space-ipa", eval_opt.common_space_ipa,
                     "Score a grapheme model in phoneme space");
  eval_cmd->add_option("--top-k", eval_opt.top_k, "Rows per error table");
  eval_cmd->add_option("--out-dir", eval_opt.out_dir, "Output directory")->required();
  eval_cmd->add_option("--inventory", eval_opt.inventory,
                       "Inventory JSON (default: built-in)");

  ErrorsOptions errors_opt;
  CLI::App* errors_cmd = app.add_subcommand(
      "errors", "Edit-type error analysis over (ref, hyp) pairs");
  errors_cmd->add_option("--pairs", errors_opt.pairs_path,
                         "TSV (ref<TAB>hyp) or JSONL {\"ref\",\"hyp\"}")->required();
  errors_cmd->add_option("--unit", errors_opt.unit, "Alignment unit")
      ->check(CLI::IsMember({"grapheme", "phoneme"}));
  errors_cmd->add_option("--top-k", errors_opt.top_k, "Rows per error table");
  errors_cmd->add_option("--out-dir", errors_opt.out_dir, "Output directory")->required();
  errors_cmd->add_option("--label", errors_opt.label, "Model label for the report");
  errors_cmd->add_option("--inventory", errors_opt.inventory,
                         "Inventory JSON (default: built-in)");

  AblationOptions ablation_opt;
  CLI::App* ablation = app.add_subcommand(
      "ablation", "Train the full minutes x level x seed grid");
  ablation->add_option("--manifest", ablation_opt.manifest, "Manifest JSONL")->required();
  ablation->add_option("--out-dir", ablation_opt.out_dir, "Output directory")->required();
  ablation->add_option("--seeds", ablation_opt.seeds, "Comma-separated seeds");
  ablation->add_option("--minutes", ablation_opt.minutes,
                       "Comma-separated minutes grid; 'all' for the full train side");
  ablation->add_option("--levels", ablation_opt.levels, "Comma-separated levels");
  ablation->add_option("--train-frac", ablation_opt.train_frac, "Train fraction");
  ablation->add_option("--epochs", ablation_opt.epochs, "Epoch cap");
  ablation->add_option("--lr", ablation_opt.lr, "Initial learning rate");
  ablation->add_option("--batch-size", ablation_opt.batch_size, "Utterances per batch");
  ablation->add_option("--patience", ablation_opt.patience,
                       "Early-stop patience in epochs (0 = off)");
  ablation->add_option("--hidden-dim", ablation_opt.hidden_dim, "Hidden layer width");
  ablation->add_option("--context", ablation_opt.context, "Context frames per side");
  ablation->add_option("--inventory", ablation_opt.inventory,
                       "Inventory JSON (default: built-in)");

  ReportOptions report_opt;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Summarize an ablation CSV or a train report");
  report_cmd->add_option("--ablation", report_opt.ablation_csv,
                         "Ablation results.csv to summarize");
  report_cmd->add_option("--train", report_opt.train_report,
                         "train_report.json to print as a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    json diag;
    diag["error"] = "usage";
    diag["message"] = e.what();
    std::cerr << diag.dump() << '\n';
    return e.get_exit_code();
  }

  try {
    if (convert->parsed()) return cmd_convert(convert_opt);
    if (tokenize->parsed()) return cmd_tokenize(tokenize_opt);
    if (synth->parsed()) return cmd_synth(synth_opt);
    if (train_cmd->parsed()) return cmd_train(train_opt);
    if (eval_cmd->parsed()) return cmd_eval(eval_opt);
    if (errors_cmd->parsed()) return cmd_errors(errors_opt);
    if (ablation->parsed()) return cmd_ablation(ablation_opt);
    if (report_cmd->parsed()) {
      if (report_opt.ablation_csv.empty() == report_opt.train_report.empty())
        throw Error("invalid_argument",
                    "report needs exactly one of --ablation or --train");
      return cmd_report(report_opt);
    }
  } catch (const Error& e) {
    json diag;
    diag["error"] = e.code();
    diag["message"] = e.what();
    std::cerr << diag.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    json diag;
    diag["error"] = "internal";
    diag["message"] = e.what();
    std::cerr << diag.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ynk
