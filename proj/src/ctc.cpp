#include "ynkit/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ynkit/errors.hpp"

namespace ynk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::int32_t kBlank = 0;

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Per-frame log-softmax into `out` (T x V).
void log_softmax_rows(const LogitMatrix& logits, std::vector<double>& out) {
  const std::size_t t_max = logits.frames, v_max = logits.vocab;
  out.resize(t_max * v_max);
  for (std::size_t t = 0; t < t_max; ++t) {
    const double* z = logits.row(t);
    double m = z[0];
    for (std::size_t v = 1; v < v_max; ++v) m = std::max(m, z[v]);
    double sum = 0.0;
    for (std::size_t v = 0; v < v_max; ++v) sum += std::exp(z[v] - m);
    const double lse = m + std::log(sum);
    double* o = out.data() + t * v_max;
    for (std::size_t v = 0; v < v_max; ++v) o[v] = z[v] - lse;
  }
}

void check_label(const LogitMatrix& logits,
                 std::span<const std::int32_t> label) {
  if (logits.frames < 1 || logits.vocab < 2)
    throw DimensionMismatch("logits must be at least 1 frame and 2 tokens");
  for (std::int32_t id : label) {
    if (id == kBlank)
      throw DimensionMismatch("label contains the blank id");
    if (id < 0 || static_cast<std::size_t>(id) >= logits.vocab)
      throw DimensionMismatch("label id " + std::to_string(id) +
                              " out of range for vocab " +
                              std::to_string(logits.vocab));
  }
}

}  // namespace

std::size_t ctc_min_frames(std::span<const std::int32_t> label) {
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < label.size(); ++i)
    if (label[i] == label[i - 1]) ++repeats;
  return label.size() + repeats;
}

namespace {

// Shared forward recursion: fills per-frame log-softmax, the extended
// blank-interleaved sequence, and alpha; returns log P(label | logits).
struct CtcForward {
  std::size_t s_max = 0;
  std::vector<std::int32_t> ext;
  std::vector<double> lp;     // T x V log-softmax
  std::vector<double> alpha;  // T x S
  double log_p = kNegInf;

  std::size_t lo(std::size_t t, std::size_t t_max) const {
    const std::ptrdiff_t v = static_cast<std::ptrdiff_t>(s_max) -
                             2 * static_cast<std::ptrdiff_t>(t_max - t);
    return v < 0 ? 0 : static_cast<std::size_t>(v);
  }
  std::size_t hi(std::size_t t) const { return std::min(s_max, 2 * t + 2); }
};

CtcForward ctc_forward(const LogitMatrix& logits,
                       std::span<const std::int32_t> label) {
  check_label(logits, label);
  const std::size_t t_max = logits.frames;
  const std::size_t v_max = logits.vocab;
  const std::size_t needed = ctc_min_frames(label);
  if (t_max < needed) throw InfeasibleLabel(t_max, needed);

  CtcForward fw;
  fw.s_max = 2 * label.size() + 1;
  fw.ext.assign(fw.s_max, kBlank);
  for (std::size_t i = 0; i < label.size(); ++i) fw.ext[2 * i + 1] = label[i];

  log_softmax_rows(logits, fw.lp);
  const auto lp_at = [&](std::size_t t, std::int32_t v) {
    return fw.lp[t * v_max + static_cast<std::size_t>(v)];
  };

  fw.alpha.assign(t_max * fw.s_max, kNegInf);
  if (fw.lo(0, t_max) <= 0 && 0 < fw.hi(0)) fw.alpha[0] = lp_at(0, fw.ext[0]);
  if (fw.s_max > 1 && 1 < fw.hi(0) && fw.lo(0, t_max) <= 1)
    fw.alpha[1] = lp_at(0, fw.ext[1]);
  for (std::size_t t = 1; t < t_max; ++t) {
    const std::size_t start = fw.lo(t, t_max), end = fw.hi(t);
    const double* prev = fw.alpha.data() + (t - 1) * fw.s_max;
    double* cur = fw.alpha.data() + t * fw.s_max;
    for (std::size_t s = start; s < end; ++s) {
      double acc = prev[s];
      if (s >= 1) acc = log_sum_exp(acc, prev[s - 1]);
      if (s >= 2 && fw.ext[s] != kBlank && fw.ext[s] != fw.ext[s - 2])
        acc = log_sum_exp(acc, prev[s - 2]);
      cur[s] = acc == kNegInf ? kNegInf : acc + lp_at(t, fw.ext[s]);
    }
  }

  fw.log_p = fw.alpha[(t_max - 1) * fw.s_max + (fw.s_max - 1)];
  if (fw.s_max > 1)
    fw.log_p = log_sum_exp(fw.log_p,
                           fw.alpha[(t_max - 1) * fw.s_max + (fw.s_max - 2)]);
  return fw;
}

}  // namespace

double ctc_loss_value(const LogitMatrix& logits,
                      std::span<const std::int32_t> label) {
  return -ctc_forward(logits, label).log_p;
}

CtcLossResult ctc_loss(const LogitMatrix& logits,
                       std::span<const std::int32_t> label) {
  const std::size_t t_max = logits.frames;
  const std::size_t v_max = logits.vocab;
  CtcForward fw = ctc_forward(logits, label);
  const std::size_t s_max = fw.s_max;
  const std::vector<std::int32_t>& ext = fw.ext;
  const std::vector<double>& lp = fw.lp;
  const std::vector<double>& alpha = fw.alpha;
  const double log_p = fw.log_p;
  const auto lp_at = [&](std::size_t t, std::int32_t v) {
    return lp[t * v_max + static_cast<std::size_t>(v)];
  };
  const auto lo = [&](std::size_t t) { return fw.lo(t, t_max); };
  const auto hi = [&](std::size_t t) { return fw.hi(t); };

  std::vector<double> beta(t_max * s_max, kNegInf);

  // beta excludes the emission at t, so alpha+beta sums to log_p per frame.
  beta[(t_max - 1) * s_max + (s_max - 1)] = 0.0;
  if (s_max > 1) beta[(t_max - 1) * s_max + (s_max - 2)] = 0.0;
  for (std::size_t t = t_max - 1; t-- > 0;) {
    const std::size_t start = lo(t), end = hi(t);
    const double* next = beta.data() + (t + 1) * s_max;
    double* cur = beta.data() + t * s_max;
    for (std::size_t s = start; s < end; ++s) {
      double acc = next[s] == kNegInf ? kNegInf : next[s] + lp_at(t + 1, ext[s]);
      if (s + 1 < s_max && next[s + 1] != kNegInf)
        acc = log_sum_exp(acc, next[s + 1] + lp_at(t + 1, ext[s + 1]));
      if (s + 2 < s_max && ext[s + 2] != kBlank && ext[s + 2] != ext[s] &&
          next[s + 2] != kNegInf)
        acc = log_sum_exp(acc, next[s + 2] + lp_at(t + 1, ext[s + 2]));
      cur[s] = acc;
    }
  }

  CtcLossResult result;
  result.loss = -log_p;
  result.grad.assign(t_max * v_max, 0.0);
  std::vector<double> occ(v_max, kNegInf);
  for (std::size_t t = 0; t < t_max; ++t) {
    std::fill(occ.begin(), occ.end(), kNegInf);
    const double* a = alpha.data() + t * s_max;
    const double* b = beta.data() + t * s_max;
    for (std::size_t s = 0; s < s_max; ++s) {
      if (a[s] == kNegInf || b[s] == kNegInf) continue;
      const auto v = static_cast<std::size_t>(ext[s]);
      occ[v] = log_sum_exp(occ[v], a[s] + b[s]);
    }
    double* g = result.grad.data() + t * v_max;
    for (std::size_t v = 0; v < v_max; ++v) {
      const double softmax = std::exp(lp[t * v_max + v]);
      const double posterior =
          occ[v] == kNegInf ? 0.0 : std::exp(occ[v] - log_p);
      g[v] = softmax - posterior;
    }
  }
  return result;
}

double ctc_loss_bruteforce(const LogitMatrix& logits,
                           std::span<const std::int32_t> label) {
  check_label(logits, label);
  const std::size_t t_max = logits.frames, v_max = logits.vocab;
  if (t_max > 8 || v_max > 5) throw TooLargeForOracle(t_max, v_max);

  // Linear-space softmax probabilities.
  std::vector<double> lp;
  log_softmax_rows(logits, lp);
  std::vector<double> prob(lp.size());
  for (std::size_t i = 0; i < lp.size(); ++i) prob[i] = std::exp(lp[i]);

  std::vector<std::int32_t> path(t_max, 0);
  std::vector<std::int32_t> collapsed;
  double total = 0.0;
  for (;;) {
    // Collapse: drop adjacent repeats, then blanks.
    collapsed.clear();
    for (std::size_t t = 0; t < t_max; ++t)
      if (t == 0 || path[t] != path[t - 1]) collapsed.push_back(path[t]);
    std::erase(collapsed, kBlank);

    if (collapsed.size() == label.size() &&
        std::equal(collapsed.begin(), collapsed.end(), label.begin())) {
      double p = 1.0;
      for (std::size_t t = 0; t < t_max; ++t)
        p *= prob[t * v_max + static_cast<std::size_t>(path[t])];
      total += p;
    }

    // Odometer increment over V^T.
    std::size_t pos = 0;
    while (pos < t_max) {
      if (static_cast<std::size_t>(++path[pos]) < v_max) break;
      path[pos] = 0;
      ++pos;
    }
    if (pos == t_max) break;
  }
  if (total <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(total);
}

DecodeResult greedy_decode(const LogitMatrix& logits,
                           std::span<const std::int32_t> forbidden) {
  const std::size_t t_max = logits.frames, v_max = logits.vocab;
  std::vector<double> lp;
  log_softmax_rows(logits, lp);
  const auto banned = [&](std::size_t v) {
    for (std::int32_t f : forbidden)
      if (static_cast<std::size_t>(f) == v) return true;
    return false;
  };

  DecodeResult result;
  std::int32_t prev = -1;
  for (std::size_t t = 0; t < t_max; ++t) {
    const double* row = lp.data() + t * v_max;
    std::size_t best = v_max;
    for (std::size_t v = 0; v < v_max; ++v) {
      if (banned(v)) continue;
      if (best == v_max || row[v] > row[best]) best = v;
    }
    result.score += row[best];
    const auto id = static_cast<std::int32_t>(best);
    if (id != prev && id != kBlank) result.ids.push_back(id);
    prev = id;
  }
  return result;
}

DecodeResult beam_decode(const LogitMatrix& logits, std::size_t beam_width,
                         std::span<const std::int32_t> forbidden) {
  if (beam_width < 1) throw Error("invalid_argument", "beam_width must be >= 1");
  const std::size_t t_max = logits.frames, v_max = logits.vocab;
  std::vector<double> lp;
  log_softmax_rows(logits, lp);
  const auto banned = [&](std::size_t v) {
    for (std::int32_t f : forbidden)
      if (static_cast<std::size_t>(f) == v) return true;
    return false;
  };

  // Per collapsed prefix: log mass of paths ending in blank / non-blank.
  using Prefix = std::vector<std::int32_t>;
  struct Mass {
    double blank = kNegInf;
    double non_blank = kNegInf;
    double total() const { return log_sum_exp(blank, non_blank); }
  };
  std::map<Prefix, Mass> beams;
  beams[{}] = Mass{0.0, kNegInf};

  Prefix extended;
  for (std::size_t t = 0; t < t_max; ++t) {
    const double* row = lp.data() + t * v_max;
    std::map<Prefix, Mass> next;
    for (const auto& [prefix, mass] : beams) {
      const double total = mass.total();
      // Emit blank: prefix unchanged.
      {
        Mass& m = next[prefix];
        m.blank = log_sum_exp(m.blank, total + row[kBlank]);
      }
      for (std::size_t v = 1; v < v_max; ++v) {
        if (banned(v)) continue;
        const auto id = static_cast<std::int32_t>(v);
        if (!prefix.empty() && prefix.back() == id) {
          // Same symbol again: either extends the run (prefix unchanged)
          // or starts a new occurrence, which needs a blank in between.
          Mass& same = next[prefix];
          same.non_blank = log_sum_exp(same.non_blank, mass.non_blank + row[v]);
          extended = prefix;
          extended.push_back(id);
          Mass& grown = next[extended];
          grown.non_blank = log_sum_exp(grown.non_blank, mass.blank + row[v]);
        } else {
          extended = prefix;
          extended.push_back(id);
          Mass& grown = next[extended];
          grown.non_blank = log_sum_exp(grown.non_blank, total + row[v]);
        }
      }
    }
    if (next.size() > beam_width) {
      std::vector<std::pair<double, const Prefix*>> ranked;
      ranked.reserve(next.size());
      for (const auto& [prefix, mass] : next)
        ranked.emplace_back(mass.total(), &prefix);
      std::sort(ranked.begin(), ranked.end(),
                [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  return *a.second < *b.second;  // deterministic tie-break
                });
      std::map<Prefix, Mass> pruned;
      for (std::size_t i = 0; i < beam_width; ++i)
        pruned.emplace(*ranked[i].second, next[*ranked[i].second]);
      next = std::move(pruned);
    }
    beams = std::move(next);
  }

  DecodeResult result;
  result.score = kNegInf;
  for (const auto& [prefix, mass] : beams) {
    const double total = mass.total();
    if (total > result.score) {
      result.score = total;
      result.ids = prefix;
    }
  }
  return result;
}

}  // namespace ynk
