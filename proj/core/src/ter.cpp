#include <algorithm>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <unordered_map>

#include "tmforge/error.hpp"
#include "tmforge/metrics.hpp"
#include "tmforge/text.hpp"

namespace tmforge::metrics {

TerStats& TerStats::operator+=(const TerStats& other) {
  edits += other.edits;
  ref_len += other.ref_len;
  shifts += other.shifts;
  return *this;
}

namespace {

constexpr int kBeamWidth = 25;
constexpr int kMaxShiftCandidates = 1000;
constexpr std::int64_t kInfinity = 10000000000000000LL;

constexpr char kOpIns = 'i';
constexpr char kOpDel = 'd';
constexpr char kOpNop = ' ';
constexpr char kOpSub = 's';
constexpr char kOpUndef = 'x';

using Words = std::vector<std::uint32_t>;

struct Cell {
  std::int64_t cost;
  char op;
};

// Beam-limited edit distance from hypothesis to reference with trace.
class BeamEditDistance {
 public:
  explicit BeamEditDistance(const Words& ref) : ref_(ref) {}

  std::pair<std::int64_t, std::string> operator()(const Words& hyp) {
    const std::size_t nh = hyp.size();
    const std::size_t nr = ref_.size();
    const std::size_t width = nr + 1;
    dist_.assign((nh + 1) * width, Cell{kInfinity, kOpUndef});
    for (std::size_t j = 0; j <= nr; ++j) dist_[j] = Cell{static_cast<std::int64_t>(j), kOpIns};

    const double ratio = nh > 0 ? static_cast<double>(nr) / static_cast<double>(nh) : 1.0;
    long beam = kBeamWidth;
    if (kBeamWidth < ratio / 2) beam = static_cast<long>(std::ceil(ratio / 2 + kBeamWidth));

    for (std::size_t i = 1; i <= nh; ++i) {
      const auto diag = static_cast<long>(std::floor(static_cast<double>(i) * ratio));
      const long min_j = std::max(0L, diag - beam);
      long max_j = std::min(static_cast<long>(nr) + 1, diag + beam);
      if (i == nh) max_j = static_cast<long>(nr) + 1;
      Cell* row = &dist_[i * width];
      const Cell* prev = &dist_[(i - 1) * width];
      for (long jj = min_j; jj < max_j; ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        if (j == 0) {
          row[0] = Cell{prev[0].cost + 1, kOpDel};
          continue;
        }
        const bool same = hyp[i - 1] == ref_[j - 1];
        const Cell ops[3] = {
            {prev[j - 1].cost + (same ? 0 : 1), same ? kOpNop : kOpSub},
            {prev[j].cost + 1, kOpDel},
            {row[j - 1].cost + 1, kOpIns},
        };
        for (const Cell& c : ops) {
          if (row[j].cost > c.cost) row[j] = c;
        }
      }
    }

    std::string trace;
    std::size_t i = nh;
    std::size_t j = nr;
    while (i > 0 || j > 0) {
      const char op = dist_[i * width + j].op;
      trace.push_back(op);
      if (op == kOpSub || op == kOpNop) {
        --i;
        --j;
      } else if (op == kOpIns) {
        --j;
      } else if (op == kOpDel) {
        --i;
      } else {
        throw Error(ErrorKind::kInternal, "TER trace left the beam");
      }
    }
    std::reverse(trace.begin(), trace.end());
    return {dist_[nh * width + nr].cost, trace};
  }

 private:
  const Words& ref_;
  std::vector<Cell> dist_;
};

struct Alignment {
  std::vector<long> align;  // reference position -> hypothesis position
  std::vector<int> ref_err;
  std::vector<int> hyp_err;
};

// Trace of hypothesis->reference edits, read in the flipped direction.
Alignment trace_to_alignment(const std::string& trace) {
  Alignment a;
  long pos_hyp = -1;
  long pos_ref = -1;
  for (char op0 : trace) {
    const char op = op0 == kOpIns ? kOpDel : (op0 == kOpDel ? kOpIns : op0);
    if (op == kOpNop || op == kOpSub) {
      ++pos_hyp;
      ++pos_ref;
      a.align.push_back(pos_hyp);
      a.hyp_err.push_back(op == kOpSub ? 1 : 0);
      a.ref_err.push_back(op == kOpSub ? 1 : 0);
    } else if (op == kOpIns) {
      ++pos_hyp;
      a.hyp_err.push_back(1);
    } else {
      ++pos_ref;
      a.align.push_back(pos_hyp);
      a.ref_err.push_back(1);
    }
  }
  return a;
}

Words perform_shift(const Words& w, std::size_t start, std::size_t length, std::size_t target) {
  Words out;
  out.reserve(w.size());
  auto append = [&](std::size_t from, std::size_t to) {
    from = std::min(from, w.size());
    to = std::min(to, w.size());
    if (from < to) out.insert(out.end(), w.begin() + static_cast<std::ptrdiff_t>(from), w.begin() + static_cast<std::ptrdiff_t>(to));
  };
  if (target < start) {
    append(0, target);
    append(start, start + length);
    append(target, start);
    append(start + length, w.size());
  } else if (target > start + length) {
    append(0, start);
    append(start + length, target);
    append(start, start + length);
    append(target, w.size());
  } else {
    append(0, start);
    append(start + length, length + target);
    append(start, start + length);
    append(length + target, w.size());
  }
  return out;
}

struct ShiftResult {
  std::int64_t delta = 0;
  Words words;
};

ShiftResult best_shift(const Words& h, const Words& r, BeamEditDistance& ed, int& checked, const TerConfig& cfg) {
  const auto [pre_score, trace] = ed(h);
  const Alignment al = trace_to_alignment(trace);

  bool have = false;
  std::tuple<std::int64_t, std::size_t, long, long> best_key{};
  Words best_words;

  const std::size_t nh = h.size();
  const std::size_t nr = r.size();
  for (std::size_t sh = 0; sh < nh; ++sh) {
    for (std::size_t sr = 0; sr < nr; ++sr) {
      const long dist = static_cast<long>(sr) - static_cast<long>(sh);
      if (std::labs(dist) > cfg.max_shift_distance) continue;
      std::size_t length = 0;
      while (h[sh + length] == r[sr + length] && length < static_cast<std::size_t>(cfg.max_shift_size)) {
        ++length;
        bool stop = nh == sh + length || nr == sr + length;

        // One candidate block (sh, sr, length).
        int hyp_sum = 0;
        for (std::size_t k = sh; k < std::min(nh, sh + length); ++k) hyp_sum += al.hyp_err[k];
        int ref_sum = 0;
        for (std::size_t k = sr; k < std::min(al.ref_err.size(), sr + length); ++k) ref_sum += al.ref_err[k];
        const long aligned = al.align[sr];
        const bool skip = hyp_sum == 0 || ref_sum == 0 ||
                          (static_cast<long>(sh) <= aligned && aligned < static_cast<long>(sh + length));
        if (!skip) {
          long prev_idx = -1;
          for (long offset = -1; offset < static_cast<long>(length); ++offset) {
            long idx;
            const long pos = static_cast<long>(sr) + offset;
            if (pos == -1) idx = 0;
            else if (pos >= 0 && pos < static_cast<long>(al.align.size())) idx = al.align[static_cast<std::size_t>(pos)] + 1;
            else break;
            if (idx == prev_idx) continue;
            prev_idx = idx;
            Words shifted = perform_shift(h, sh, length, static_cast<std::size_t>(idx));
            const std::int64_t gain = pre_score - ed(shifted).first;
            const auto key = std::make_tuple(gain, length, -static_cast<long>(sh), -idx);
            ++checked;
            if (!have || key > best_key) {
              have = true;
              best_key = key;
              best_words = std::move(shifted);
            }
          }
          if (checked >= kMaxShiftCandidates) goto done;
        }
        if (stop) break;
      }
    }
  }
done:
  if (!have) return {0, h};
  return {std::get<0>(best_key), std::move(best_words)};
}

}  // namespace

TerStats translation_edit_rate(const std::vector<std::string>& hyp_words, const std::vector<std::string>& ref_words,
                               const TerConfig& config) {
  TerStats out;
  out.ref_len = static_cast<std::int64_t>(ref_words.size());
  if (ref_words.empty()) {
    out.edits = static_cast<std::int64_t>(hyp_words.size());
    return out;
  }
  std::unordered_map<std::string_view, std::uint32_t> vocab;
  auto intern = [&vocab](const std::vector<std::string>& words) {
    Words ids;
    ids.reserve(words.size());
    for (const auto& w : words) ids.push_back(vocab.emplace(w, static_cast<std::uint32_t>(vocab.size())).first->second);
    return ids;
  };
  const Words ref = intern(ref_words);
  Words input = intern(hyp_words);
  BeamEditDistance ed(ref);
  int checked = 0;
  while (true) {
    ShiftResult s = best_shift(input, ref, ed, checked, config);
    if (checked >= kMaxShiftCandidates) break;
    if (s.delta <= 0) break;
    ++out.shifts;
    input = std::move(s.words);
  }
  out.edits = out.shifts + ed(input).first;
  return out;
}

TerStats ter_sentence_stats(std::string_view hypothesis, std::string_view reference, const TerConfig& config) {
  auto words = [&config](std::string_view s) {
    const std::string tok = tokenize_tercom(text::rstrip(s), config);
    std::vector<std::string> out;
    for (std::string_view w : text::split_whitespace(tok)) out.emplace_back(w);
    return out;
  };
  return translation_edit_rate(words(hypothesis), words(reference), config);
}

double ter_from_stats(const TerStats& stats) {
  if (stats.ref_len > 0) return 100.0 * static_cast<double>(stats.edits) / static_cast<double>(stats.ref_len);
  return stats.edits > 0 ? 100.0 : 0.0;
}

}  // namespace tmforge::metrics
