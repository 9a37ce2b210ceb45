#include "ynkit/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ynkit/errors.hpp"
#include "ynkit/kernels.hpp"
#include "ynkit/rng.hpp"

namespace ynk {

namespace {

using json = nlohmann::ordered_json;

std::uint64_t fnv1a64_bytes(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void check_features(const ModelConfig& cfg, const FeatureMatrix& f) {
  if (f.dim != cfg.input_dim)
    throw DimensionMismatch("feature dim " + std::to_string(f.dim) +
                            " does not match model input_dim " +
                            std::to_string(cfg.input_dim));
  if (f.frames < 1) throw DimensionMismatch("feature matrix has no frames");
}

// Zero-padded context window around frame t, as doubles.
void fill_window(const ModelConfig& cfg, const FeatureMatrix& f, std::size_t t,
                 double* out) {
  const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(cfg.context);
  std::size_t k = 0;
  for (std::ptrdiff_t off = -c; off <= c; ++off) {
    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) + off;
    if (src < 0 || src >= static_cast<std::ptrdiff_t>(f.frames)) {
      for (std::size_t d = 0; d < f.dim; ++d) out[k++] = 0.0;
    } else {
      const float* row = f.row(static_cast<std::size_t>(src));
      for (std::size_t d = 0; d < f.dim; ++d) out[k++] = row[d];
    }
  }
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& config) {
  if (config.input_dim < 1 || config.hidden_dim < 1 || config.vocab_size < 2)
    throw DimensionMismatch("model dims must be positive (vocab >= 2)");
  ModelParams p;
  p.config = config;
  p.w1.resize(config.hidden_dim * config.window_dim());
  p.b1.assign(config.hidden_dim, 0.0);
  p.w2.resize(config.vocab_size * config.hidden_dim);
  p.b2.assign(config.vocab_size, 0.0);
  Rng rng(Rng::mix(config.seed, 0x6d6f64656cULL));
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(config.window_dim()));
  for (double& w : p.w1) w = rng.uniform(-bound1, bound1);
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
  for (double& w : p.w2) w = rng.uniform(-bound2, bound2);
  return p;
}

Gradients::Gradients(const ModelConfig& config)
    : w1(config.hidden_dim * config.window_dim(), 0.0),
      b1(config.hidden_dim, 0.0),
      w2(config.vocab_size * config.hidden_dim, 0.0),
      b2(config.vocab_size, 0.0) {}

void Gradients::zero() {
  std::fill(w1.begin(), w1.end(), 0.0);
  std::fill(b1.begin(), b1.end(), 0.0);
  std::fill(w2.begin(), w2.end(), 0.0);
  std::fill(b2.begin(), b2.end(), 0.0);
}

LogitMatrix forward(const ModelParams& params, const FeatureMatrix& features) {
  const ModelConfig& cfg = params.config;
  check_features(cfg, features);
  LogitMatrix logits(features.frames, cfg.vocab_size);
  std::vector<double> window(cfg.window_dim());
  std::vector<double> hidden(cfg.hidden_dim);
  for (std::size_t t = 0; t < features.frames; ++t) {
    fill_window(cfg, features, t, window.data());
    kernels::matvec(params.w1.data(), window.data(), params.b1.data(),
                    hidden.data(), cfg.hidden_dim, cfg.window_dim());
    for (double& h : hidden) h = std::tanh(h);
    kernels::matvec(params.w2.data(), hidden.data(), params.b2.data(),
                    logits.row(t), cfg.vocab_size, cfg.hidden_dim);
  }
  return logits;
}

double backward(const ModelParams& params, const FeatureMatrix& features,
                std::span<const std::int32_t> label, Gradients& acc) {
  const ModelConfig& cfg = params.config;
  check_features(cfg, features);
  const std::size_t t_max = features.frames;
  const std::size_t win = cfg.window_dim();

  // Forward pass, caching windows and hidden activations per frame.
  LogitMatrix logits(t_max, cfg.vocab_size);
  std::vector<double> windows(t_max * win);
  std::vector<double> hiddens(t_max * cfg.hidden_dim);
  for (std::size_t t = 0; t < t_max; ++t) {
    double* window = windows.data() + t * win;
    double* hidden = hiddens.data() + t * cfg.hidden_dim;
    fill_window(cfg, features, t, window);
    kernels::matvec(params.w1.data(), window, params.b1.data(), hidden,
                    cfg.hidden_dim, win);
    for (std::size_t h = 0; h < cfg.hidden_dim; ++h) hidden[h] = std::tanh(hidden[h]);
    kernels::matvec(params.w2.data(), hidden, params.b2.data(), logits.row(t),
                    cfg.vocab_size, cfg.hidden_dim);
  }

  const CtcLossResult ctc = ctc_loss(logits, label);

  std::vector<double> d_hidden(cfg.hidden_dim);
  for (std::size_t t = 0; t < t_max; ++t) {
    const double* g = ctc.grad.data() + t * cfg.vocab_size;
    const double* hidden = hiddens.data() + t * cfg.hidden_dim;
    const double* window = windows.data() + t * win;
    kernels::axpy(1.0, g, acc.b2.data(), cfg.vocab_size);
    kernels::add_outer(acc.w2.data(), g, hidden, 1.0, cfg.vocab_size,
                       cfg.hidden_dim);
    kernels::matvec_transposed(params.w2.data(), g, d_hidden.data(),
                               cfg.vocab_size, cfg.hidden_dim);
    for (std::size_t h = 0; h < cfg.hidden_dim; ++h)
      d_hidden[h] *= 1.0 - hidden[h] * hidden[h];
    kernels::axpy(1.0, d_hidden.data(), acc.b1.data(), cfg.hidden_dim);
    kernels::add_outer(acc.w1.data(), d_hidden.data(), window, 1.0,
                       cfg.hidden_dim, win);
  }
  return ctc.loss;
}

void save_checkpoint(const ModelParams& params, std::uint64_t vocab_fingerprint,
                     const std::filesystem::path& path) {
  json weights;
  weights["w1"] = params.w1;
  weights["b1"] = params.b1;
  weights["w2"] = params.w2;
  weights["b2"] = params.b2;
  const std::string weights_str = weights.dump();

  json root;
  root["version"] = 1;
  root["model"] = {{"input_dim", params.config.input_dim},
                   {"context", params.config.context},
                   {"hidden_dim", params.config.hidden_dim},
                   {"vocab_size", params.config.vocab_size},
                   {"seed", params.config.seed}};
  root["vocab_fingerprint"] = hex64(vocab_fingerprint);
  root["checksum"] = hex64(fnv1a64_bytes(weights_str));
  root["weights"] = std::move(weights);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << root.dump(2) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

ModelParams load_checkpoint(const std::filesystem::path& path,
                            const TokenVocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("invalid_checkpoint", std::string("json parse: ") + e.what());
  }
  try {
    if (root.at("version").get<int>() != 1)
      throw VersionUnsupported(root.at("version").get<long long>());
    ModelParams p;
    const json& m = root.at("model");
    p.config.input_dim = m.at("input_dim").get<std::size_t>();
    p.config.context = m.at("context").get<std::size_t>();
    p.config.hidden_dim = m.at("hidden_dim").get<std::size_t>();
    p.config.vocab_size = m.at("vocab_size").get<std::size_t>();
    p.config.seed = m.at("seed").get<std::uint64_t>();
    p.w1 = root.at("weights").at("w1").get<std::vector<double>>();
    p.b1 = root.at("weights").at("b1").get<std::vector<double>>();
    p.w2 = root.at("weights").at("w2").get<std::vector<double>>();
    p.b2 = root.at("weights").at("b2").get<std::vector<double>>();

    json weights;
    weights["w1"] = p.w1;
    weights["b1"] = p.b1;
    weights["w2"] = p.w2;
    weights["b2"] = p.b2;
    if (hex64(fnv1a64_bytes(weights.dump())) !=
        root.at("checksum").get<std::string>())
      throw ChecksumMismatch();
    if (root.at("vocab_fingerprint").get<std::string>() !=
        hex64(vocab.fingerprint()))
      throw VocabFingerprintMismatch();
    if (p.config.vocab_size != vocab.size())
      throw VocabFingerprintMismatch();
    if (p.w1.size() != p.config.hidden_dim * p.config.window_dim() ||
        p.b1.size() != p.config.hidden_dim ||
        p.w2.size() != p.config.vocab_size * p.config.hidden_dim ||
        p.b2.size() != p.config.vocab_size)
      throw Error("invalid_checkpoint", "weight shapes inconsistent with config");
    return p;
  } catch (const json::exception& e) {
    throw Error("invalid_checkpoint", std::string("bad checkpoint json: ") + e.what());
  }
}

}  // namespace ynk
