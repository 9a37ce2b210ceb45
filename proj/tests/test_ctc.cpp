#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "ynkit/ctc.hpp"
#include "ynkit/errors.hpp"
#include "ynkit/rng.hpp"

using namespace ynk;

namespace {

LogitMatrix random_logits(Rng& rng, std::size_t t, std::size_t v,
                          double scale = 2.0) {
  LogitMatrix m(t, v);
  for (double& x : m.values) x = rng.uniform(-scale, scale);
  return m;
}

std::vector<std::int32_t> random_label(Rng& rng, std::size_t max_len,
                                       std::size_t v) {
  std::vector<std::int32_t> label(rng.below(max_len + 1));
  for (auto& id : label) id = 1 + static_cast<std::int32_t>(rng.below(v - 1));
  return label;
}

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max(1.0, std::fabs(b));
}

// Exact labeling posterior by path enumeration: collapse every path, sum
// probabilities per labeling.
std::map<std::vector<std::int32_t>, double> labeling_posteriors(
    const LogitMatrix& logits) {
  const std::size_t t_max = logits.frames, v_max = logits.vocab;
  std::vector<std::vector<double>> prob(t_max, std::vector<double>(v_max));
  for (std::size_t t = 0; t < t_max; ++t) {
    double m = logits.at(t, 0);
    for (std::size_t v = 1; v < v_max; ++v) m = std::max(m, logits.at(t, v));
    double sum = 0.0;
    for (std::size_t v = 0; v < v_max; ++v) sum += std::exp(logits.at(t, v) - m);
    for (std::size_t v = 0; v < v_max; ++v)
      prob[t][v] = std::exp(logits.at(t, v) - m) / sum;
  }
  std::map<std::vector<std::int32_t>, double> posterior;
  std::vector<std::int32_t> path(t_max, 0);
  for (;;) {
    std::vector<std::int32_t> collapsed;
    for (std::size_t t = 0; t < t_max; ++t)
      if (t == 0 || path[t] != path[t - 1]) collapsed.push_back(path[t]);
    std::erase(collapsed, 0);
    double p = 1.0;
    for (std::size_t t = 0; t < t_max; ++t)
      p *= prob[t][static_cast<std::size_t>(path[t])];
    posterior[collapsed] += p;

    std::size_t pos = 0;
    while (pos < t_max) {
      if (static_cast<std::size_t>(++path[pos]) < v_max) break;
      path[pos] = 0;
      ++pos;
    }
    if (pos == t_max) break;
  }
  return posterior;
}

}  // namespace

TEST_CASE("hand-checked two-frame instance") {
  // softmax rows (0.6, 0.4) and (0.5, 0.5); label = [a].
  LogitMatrix logits(2, 2);
  logits.at(0, 0) = std::log(0.6);
  logits.at(0, 1) = std::log(0.4);
  logits.at(1, 0) = 0.0;
  logits.at(1, 1) = 0.0;
  const std::vector<std::int32_t> label = {1};

  const double oracle = ctc_loss_bruteforce(logits, label);
  CHECK(oracle == doctest::Approx(-std::log(0.7)).epsilon(1e-12));
  const CtcLossResult dp = ctc_loss(logits, label);
  CHECK(dp.loss == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("uniform three-frame instance, expected value from the oracle") {
  LogitMatrix logits(3, 2);  // all-zero logits: uniform softmax
  const std::vector<std::int32_t> label = {1};
  const double oracle = ctc_loss_bruteforce(logits, label);
  // 6 of the 8 paths collapse to [a].
  CHECK(oracle == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
  CHECK(ctc_loss(logits, label).loss == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("empty label: only the all-blank path") {
  Rng rng(3);
  const LogitMatrix logits = random_logits(rng, 1, 3);
  const CtcLossResult res = ctc_loss(logits, {});
  double m = std::max({logits.at(0, 0), logits.at(0, 1), logits.at(0, 2)});
  double lse = m + std::log(std::exp(logits.at(0, 0) - m) +
                            std::exp(logits.at(0, 1) - m) +
                            std::exp(logits.at(0, 2) - m));
  CHECK(res.loss == doctest::Approx(-(logits.at(0, 0) - lse)).epsilon(1e-12));
}

TEST_CASE("repeated labels need a separating blank") {
  LogitMatrix logits(2, 2);
  const std::vector<std::int32_t> label = {1, 1};
  CHECK(ctc_min_frames(label) == 3);
  CHECK_THROWS_AS(ctc_loss(logits, label), InfeasibleLabel);
  LogitMatrix three(3, 2);
  CHECK_NOTHROW(ctc_loss(three, label));
  CHECK(ctc_loss_bruteforce(logits, label) ==
        std::numeric_limits<double>::infinity());
}

TEST_CASE("label validation") {
  LogitMatrix logits(3, 3);
  CHECK_THROWS_AS(ctc_loss(logits, std::vector<std::int32_t>{0}),
                  DimensionMismatch);
  CHECK_THROWS_AS(ctc_loss(logits, std::vector<std::int32_t>{5}),
                  DimensionMismatch);
  LogitMatrix big(9, 2);
  CHECK_THROWS_AS(ctc_loss_bruteforce(big, std::vector<std::int32_t>{1}),
                  TooLargeForOracle);
}

TEST_CASE("oracle equivalence over 200 seeded instances") {
  Rng rng(12345);
  int tested = 0;
  while (tested < 200) {
    const std::size_t t = 1 + rng.below(6);
    const std::size_t v = 2 + rng.below(3);
    const LogitMatrix logits = random_logits(rng, t, v, 3.0);
    const std::vector<std::int32_t> label = random_label(rng, 3, v);
    if (t < ctc_min_frames(label)) continue;
    const double oracle = ctc_loss_bruteforce(logits, label);
    const double dp = ctc_loss(logits, label).loss;
    REQUIRE(rel_err(dp, oracle) < 1e-10);
    CHECK(ctc_loss_value(logits, label) == dp);
    CHECK(std::exp(-dp) > 0.0);
    CHECK(std::exp(-dp) <= 1.0 + 1e-12);
    ++tested;
  }
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(777);
  const double h = 1e-5;
  double max_rel = 0.0;
  int tested = 0;
  while (tested < 50) {
    const std::size_t t = 1 + rng.below(5);
    const std::size_t v = 2 + rng.below(3);
    LogitMatrix logits = random_logits(rng, t, v, 2.0);
    const std::vector<std::int32_t> label = random_label(rng, 3, v);
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
      max_rel = std::max(max_rel, std::fabs(fd - res.grad[i]) / denom);
    }
    ++tested;
  }
  CHECK(max_rel < 1e-4);
}

TEST_CASE("gradient rows sum to zero; loss is shift-invariant") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t t = 2 + rng.below(4);
    const std::size_t v = 2 + rng.below(3);
    LogitMatrix logits = random_logits(rng, t, v);
    std::vector<std::int32_t> label = random_label(rng, 2, v);
    if (t < ctc_min_frames(label)) label.clear();
    const CtcLossResult res = ctc_loss(logits, label);
    for (std::size_t row = 0; row < t; ++row) {
      double sum = 0.0;
      for (std::size_t col = 0; col < v; ++col) sum += res.grad[row * v + col];
      CHECK(std::fabs(sum) < 1e-10);
    }
    const std::size_t shifted_row = rng.below(t);
    for (std::size_t col = 0; col < v; ++col)
      logits.at(shifted_row, col) += 17.5;
    CHECK(std::fabs(ctc_loss(logits, label).loss - res.loss) < 1e-10);
  }
}

TEST_CASE("greedy decode collapse rules") {
  const auto one_hot = [](std::initializer_list<int> ids, std::size_t v) {
    LogitMatrix m(ids.size(), v);
    std::size_t t = 0;
    for (int id : ids) {
      for (std::size_t k = 0; k < v; ++k) m.at(t, k) = (k == static_cast<std::size_t>(id)) ? 10.0 : 0.0;
      ++t;
    }
    return m;
  };
  CHECK(greedy_decode(one_hot({1, 1, 0, 2}, 3)).ids ==
        std::vector<std::int32_t>{1, 2});
  CHECK(greedy_decode(one_hot({0, 0, 0}, 3)).ids.empty());
  CHECK(greedy_decode(one_hot({1, 0, 1}, 3)).ids ==
        std::vector<std::int32_t>{1, 1});

  // Ties break to the lowest id: all-zero logits pick blank everywhere.
  CHECK(greedy_decode(LogitMatrix(4, 3)).ids.empty());

  // Forbidden ids are never selected.
  const LogitMatrix m = one_hot({1, 2}, 3);
  const std::int32_t banned[] = {1};
  CHECK(greedy_decode(m, banned).ids == std::vector<std::int32_t>{2});

  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const LogitMatrix r = random_logits(rng, 1 + rng.below(8), 2 + rng.below(4));
    for (std::int32_t id : greedy_decode(r).ids) CHECK(id != 0);
  }
}

TEST_CASE("exhaustive beam equals the labeling-posterior argmax") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t t = 1 + rng.below(4);
    const std::size_t v = 2 + rng.below(2);
    const LogitMatrix logits = random_logits(rng, t, v, 2.5);
    const auto posterior = labeling_posteriors(logits);
    std::vector<std::int32_t> best;
    double best_p = -1.0;
    for (const auto& [labeling, p] : posterior) {
      if (p > best_p) {
        best_p = p;
        best = labeling;
      }
    }
    const DecodeResult beam = beam_decode(logits, 4096);
    CHECK(beam.ids == best);
    CHECK(beam.score == doctest::Approx(std::log(best_p)).epsilon(1e-9));
  }
}

TEST_CASE("wider beams never lose labeling probability") {
  Rng rng(424242);
  for (int trial = 0; trial < 20; ++trial) {
    const LogitMatrix logits =
        random_logits(rng, 2 + rng.below(6), 2 + rng.below(3), 2.0);
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t width : {1u, 2u, 4u, 8u}) {
      const double score = beam_decode(logits, width).score;
      CHECK(score >= prev - 1e-12);
      prev = score;
    }
  }
}

TEST_CASE("single-frame beam") {
  LogitMatrix m(1, 3);
  m.at(0, 1) = 5.0;  // non-blank wins
  CHECK(beam_decode(m, 4).ids == std::vector<std::int32_t>{1});
  LogitMatrix blank(1, 3);
  blank.at(0, 0) = 5.0;
  CHECK(beam_decode(blank, 4).ids.empty());
}
