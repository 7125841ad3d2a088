#include "tmforge/decontam.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

#include "tmforge/error.hpp"
#include "tmforge/text.hpp"

namespace tmforge::decontam {

std::string_view to_string(Combine c) { return c == Combine::kMax ? "max" : "mean"; }

Combine parse_combine(std::string_view s) {
  if (s == "max") return Combine::kMax;
  if (s == "mean") return Combine::kMean;
  throw ValidationError("unknown combine mode '" + std::string(s) + "' (expected max or mean)");
}

void DecontamConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("threshold must be in [0, 1]");
  if (ngram_order < 1) throw ValidationError("ngram_order must be >= 1");
}

// --- edit distance ----------------------------------------------------------

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Bit masks of pattern positions per code point.
class PatternMasks {
 public:
  explicit PatternMasks(std::u32string_view pattern) : size_(pattern.size()) {
    ascii_.fill(0);
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      const char32_t c = pattern[i];
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (c < 128) {
        ascii_[c] |= bit;
        continue;
      }
      auto it = std::find_if(other_.begin(), other_.end(), [c](const auto& p) { return p.first == c; });
      if (it == other_.end()) other_.emplace_back(c, bit);
      else it->second |= bit;
    }
    std::sort(other_.begin(), other_.end());
  }

  std::uint64_t operator[](char32_t c) const {
    if (c < 128) return ascii_[c];
    auto it = std::lower_bound(other_.begin(), other_.end(), std::pair<char32_t, std::uint64_t>{c, 0});
    return (it != other_.end() && it->first == c) ? it->second : 0;
  }

  std::size_t size() const { return size_; }

 private:
  std::size_t size_;
  std::array<std::uint64_t, 128> ascii_;
  std::vector<std::pair<char32_t, std::uint64_t>> other_;
};

// Bit-parallel global edit distance (Myers 1999, Hyyro 2001); pattern <= 64.
std::size_t myers(const PatternMasks& peq, std::u32string_view text, std::size_t max_dist) {
  const std::size_t m = peq.size();
  const std::size_t n = text.size();
  if (m == 0) return n;
  const std::uint64_t high = std::uint64_t{1} << (m - 1);
  std::uint64_t pv = ~std::uint64_t{0};
  std::uint64_t mv = 0;
  std::size_t score = m;
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint64_t eq = peq[text[j]];
    const std::uint64_t xv = eq | mv;
    const std::uint64_t xh = (((eq & pv) + pv) ^ pv) | eq;
    std::uint64_t ph = mv | ~(xh | pv);
    std::uint64_t mh = pv & xh;
    if (ph & high) ++score;
    else if (mh & high) --score;
    ph = (ph << 1) | 1;
    mh <<= 1;
    pv = mh | ~(xv | ph);
    mv = ph & xv;
    const std::size_t remaining = n - j - 1;
    if (score > max_dist + remaining) return max_dist + 1;
  }
  return score;
}

// Ukkonen band of half-width max_dist.
std::size_t banded(std::u32string_view a, std::u32string_view b, std::size_t max_dist) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t diff = n > m ? n - m : m - n;
  if (diff > max_dist) return max_dist + 1;
  const std::size_t inf = max_dist + 1;
  std::vector<std::size_t> prev(m + 1, inf);
  std::vector<std::size_t> cur(m + 1, inf);
  for (std::size_t j = 0; j <= std::min(m, max_dist); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = i > max_dist ? i - max_dist : 0;
    const std::size_t hi = std::min(m, i + max_dist);
    if (lo > 0) cur[lo - 1] = inf;
    std::size_t row_min = inf;
    for (std::size_t j = lo; j <= hi; ++j) {
      std::size_t v;
      if (j == 0) {
        v = i;
      } else {
        v = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
        v = std::min(v, cur[j - 1] + 1);
        v = std::min(v, prev[j] + 1);
      }
      cur[j] = std::min(v, inf);
      row_min = std::min(row_min, cur[j]);
    }
    if (hi < m) cur[hi + 1] = inf;
    if (row_min > max_dist) return max_dist + 1;
    std::swap(prev, cur);
  }
  return std::min(prev[m], inf);
}

std::size_t bounded_distance(std::u32string_view a, std::u32string_view b, std::size_t max_dist,
                             const PatternMasks* a_masks) {
  const std::size_t diff = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
  if (diff > max_dist) return max_dist + 1;
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  if (a_masks != nullptr) return myers(*a_masks, b, max_dist);
  if (a.size() <= 64) return myers(PatternMasks(a), b, max_dist);
  if (b.size() <= 64) return myers(PatternMasks(b), a, max_dist);
  return banded(a, b, max_dist);
}

}  // namespace

std::size_t lev_distance_bounded(std::u32string_view a, std::u32string_view b, std::size_t max_dist) {
  return bounded_distance(a, b, max_dist, nullptr);
}

std::size_t lev_distance(std::u32string_view a, std::u32string_view b) {
  const std::size_t cap = std::max(a.size(), b.size());
  return bounded_distance(a, b, cap, nullptr);
}

std::size_t lev_distance(std::string_view a, std::string_view b) {
  return lev_distance(text::decode_utf8(a), text::decode_utf8(b));
}

double lev_similarity_from_distance(std::size_t distance, std::size_t len_a, std::size_t len_b) {
  const std::size_t longest = std::max(len_a, len_b);
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(distance) / static_cast<double>(longest);
}

double lev_similarity(std::string_view a, std::string_view b) {
  const std::u32string ua = text::decode_utf8(a);
  const std::u32string ub = text::decode_utf8(b);
  return lev_similarity_from_distance(lev_distance(ua, ub), ua.size(), ub.size());
}

double combine(double lev_sim, double ngram_sim, Combine mode) {
  return mode == Combine::kMax ? std::max(lev_sim, ngram_sim) : (lev_sim + ngram_sim) / 2.0;
}

// --- word n-grams -------------------------------------------------------------

namespace {

using Ids = std::span<const std::uint32_t>;

bool gram_less(Ids s, std::size_t i, std::size_t j, std::size_t m) {
  return std::lexicographical_compare(s.begin() + i, s.begin() + i + m, s.begin() + j, s.begin() + j + m);
}

bool gram_equal(Ids a, std::size_t i, Ids b, std::size_t j, std::size_t m) {
  return std::equal(a.begin() + i, a.begin() + i + m, b.begin() + j);
}

// Start offsets of the distinct m-grams of s, in lexicographic gram order.
void distinct_grams(Ids s, std::size_t m, std::vector<std::uint32_t>& out) {
  out.clear();
  if (s.size() < m) return;
  for (std::size_t i = 0; i + m <= s.size(); ++i) out.push_back(static_cast<std::uint32_t>(i));
  std::sort(out.begin(), out.end(), [&](std::uint32_t x, std::uint32_t y) { return gram_less(s, x, y, m); });
  out.erase(std::unique(out.begin(), out.end(),
                        [&](std::uint32_t x, std::uint32_t y) { return gram_equal(s, x, s, y, m); }),
            out.end());
}

double jaccard_sorted(Ids a, const std::vector<std::uint32_t>& ga, Ids b, const std::vector<std::uint32_t>& gb,
                      std::size_t m) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t inter = 0;
  while (i < ga.size() && j < gb.size()) {
    const bool lt = std::lexicographical_compare(a.begin() + ga[i], a.begin() + ga[i] + m, b.begin() + gb[j],
                                                 b.begin() + gb[j] + m);
    if (lt) {
      ++i;
    } else if (gram_equal(a, ga[i], b, gb[j], m)) {
      ++inter;
      ++i;
      ++j;
    } else {
      ++j;
    }
  }
  const std::size_t uni = ga.size() + gb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double ngram_ids(Ids a, Ids b, std::size_t n, std::vector<std::uint32_t>& ga, std::vector<std::uint32_t>& gb) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const std::size_t m = std::min({n, a.size(), b.size()});
  distinct_grams(a, m, ga);
  distinct_grams(b, m, gb);
  return jaccard_sorted(a, ga, b, gb, m);
}

std::uint64_t hash_ids(Ids s, std::size_t pos, std::size_t m) {
  std::uint64_t h = 0x8445D61A4E774912ULL ^ m;
  for (std::size_t i = pos; i < pos + m; ++i) {
    h ^= s[i] + 0x632BE59BD9B4E019ULL;
    h *= 0x9E3779B97F4A7C15ULL;
    h ^= h >> 32;
  }
  return h;
}

}  // namespace

double ngram_similarity(std::string_view a, std::string_view b, std::size_t n) {
  if (n < 1) throw ValidationError("n-gram order must be >= 1");
  std::unordered_map<std::string_view, std::uint32_t> vocab;
  auto ids = [&vocab](std::string_view s) {
    std::vector<std::uint32_t> out;
    for (std::string_view tok : text::split_whitespace(s)) {
      out.push_back(vocab.emplace(tok, static_cast<std::uint32_t>(vocab.size())).first->second);
    }
    return out;
  };
  const auto ia = ids(a);
  const auto ib = ids(b);
  std::vector<std::uint32_t> ga;
  std::vector<std::uint32_t> gb;
  return ngram_ids(ia, ib, n, ga, gb);
}

double combined_similarity(std::string_view a, std::string_view b, const DecontamConfig& config) {
  return combine(lev_similarity(a, b), ngram_similarity(a, b, config.ngram_order), config.combine);
}

// --- index --------------------------------------------------------------------

namespace {

constexpr std::size_t kBuckets = 64;

std::size_t bucket_of(char32_t cp) {
  return static_cast<std::size_t>((static_cast<std::uint32_t>(cp) * 0x9E3779B1U) >> 26);
}

void fill_histogram(std::u32string_view s, std::uint8_t* out) {
  std::fill(out, out + kBuckets, std::uint8_t{0});
  for (char32_t c : s) {
    std::uint8_t& v = out[bucket_of(c)];
    if (v != 255) ++v;
  }
}

// Lower bound on edit distance from bucketed character counts.
std::size_t bag_bound(const std::uint8_t* a, const std::uint8_t* b) {
#if defined(__SSE2__)
  const __m128i zero = _mm_setzero_si128();
  __m128i sab = zero;
  __m128i sba = zero;
  for (std::size_t i = 0; i < kBuckets; i += 16) {
    const __m128i x = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a + i));
    const __m128i y = _mm_loadu_si128(reinterpret_cast<const __m128i*>(b + i));
    sab = _mm_add_epi64(sab, _mm_sad_epu8(_mm_subs_epu8(x, y), zero));
    sba = _mm_add_epi64(sba, _mm_sad_epu8(_mm_subs_epu8(y, x), zero));
  }
  const auto total = [](__m128i v) {
    return static_cast<std::size_t>(_mm_cvtsi128_si32(v)) +
           static_cast<std::size_t>(_mm_cvtsi128_si32(_mm_srli_si128(v, 8)));
  };
  return std::max(total(sab), total(sba));
#else
  std::size_t ab = 0;
  std::size_t ba = 0;
  for (std::size_t i = 0; i < kBuckets; ++i) {
    ab += a[i] > b[i] ? a[i] - b[i] : 0;
    ba += b[i] > a[i] ? b[i] - a[i] : 0;
  }
  return std::max(ab, ba);
#endif
}

// Sorted hash -> posting-list table.
struct GramTable {
  std::vector<std::uint64_t> keys;
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> postings;

  void build(std::vector<std::pair<std::uint64_t, std::uint32_t>>& pairs) {
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    keys.clear();
    offsets.clear();
    postings.clear();
    postings.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (i == 0 || pairs[i].first != pairs[i - 1].first) {
        keys.push_back(pairs[i].first);
        offsets.push_back(static_cast<std::uint32_t>(postings.size()));
      }
      postings.push_back(pairs[i].second);
    }
    offsets.push_back(static_cast<std::uint32_t>(postings.size()));
    keys.shrink_to_fit();
    offsets.shrink_to_fit();
  }

  std::span<const std::uint32_t> find(std::uint64_t key) const {
    const auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) return {};
    const auto k = static_cast<std::size_t>(it - keys.begin());
    return {postings.data() + offsets[k], postings.data() + offsets[k + 1]};
  }
};

}  // namespace

struct NgramIndex::Impl {
  std::size_t n = 0;
  std::size_t units = 0;
  std::unordered_map<std::string, std::uint32_t> vocab;
  std::vector<std::uint32_t> tok_offsets;
  std::vector<std::uint32_t> tokens;
  std::vector<std::size_t> cp_offsets;
  std::u32string cps;
  std::vector<std::uint8_t> histograms;
  std::vector<std::uint32_t> by_length;
  std::vector<std::uint32_t> length_start;
  // grams[m]: m-grams of units with at least m words (m = 1..n).
  std::vector<GramTable> grams;
  // whole[m]: complete token sequence of units with exactly m words (m < n).
  std::vector<GramTable> whole;

  Ids ids(std::size_t u) const {
    return {tokens.data() + tok_offsets[u], tokens.data() + tok_offsets[u + 1]};
  }
  std::u32string_view chars(std::size_t u) const {
    return {cps.data() + cp_offsets[u], cp_offsets[u + 1] - cp_offsets[u]};
  }
  const std::uint8_t* histogram(std::size_t u) const { return histograms.data() + u * kBuckets; }
};

NgramIndex::NgramIndex(const Corpus& train, std::size_t n) : impl_(std::make_unique<Impl>()) {
  if (n < 1) throw ValidationError("n-gram order must be >= 1");
  if (train.size() >= std::numeric_limits<std::uint32_t>::max()) throw ValidationError("train set too large");
  Impl& x = *impl_;
  x.n = n;
  x.units = train.size();
  x.tok_offsets.reserve(x.units + 1);
  x.cp_offsets.reserve(x.units + 1);
  x.histograms.resize(x.units * kBuckets);
  x.tok_offsets.push_back(0);
  x.cp_offsets.push_back(0);
  std::size_t max_len = 0;
  for (std::size_t u = 0; u < x.units; ++u) {
    const std::string& src = train[u].source;
    for (std::string_view tok : text::split_whitespace(src)) {
      const auto id = static_cast<std::uint32_t>(x.vocab.size());
      x.tokens.push_back(x.vocab.emplace(std::string(tok), id).first->second);
    }
    x.tok_offsets.push_back(static_cast<std::uint32_t>(x.tokens.size()));
    const std::u32string chars = text::decode_utf8(src);
    fill_histogram(chars, x.histograms.data() + u * kBuckets);
    x.cps += chars;
    x.cp_offsets.push_back(x.cps.size());
    max_len = std::max(max_len, chars.size());
  }

  std::vector<std::uint32_t> counts(max_len + 2, 0);
  for (std::size_t u = 0; u < x.units; ++u) ++counts[x.chars(u).size() + 1];
  for (std::size_t l = 1; l < counts.size(); ++l) counts[l] += counts[l - 1];
  x.length_start = counts;
  x.by_length.resize(x.units);
  for (std::size_t u = 0; u < x.units; ++u) x.by_length[counts[x.chars(u).size()]++] = static_cast<std::uint32_t>(u);

  x.grams.resize(n + 1);
  x.whole.resize(n);
  std::vector<std::pair<std::uint64_t, std::uint32_t>> pairs;
  for (std::size_t m = 1; m <= n; ++m) {
    pairs.clear();
    for (std::size_t u = 0; u < x.units; ++u) {
      const Ids s = x.ids(u);
      for (std::size_t i = 0; i + m <= s.size(); ++i) pairs.emplace_back(hash_ids(s, i, m), u);
    }
    x.grams[m].build(pairs);
  }
  for (std::size_t m = 0; m < n; ++m) {
    pairs.clear();
    for (std::size_t u = 0; u < x.units; ++u) {
      const Ids s = x.ids(u);
      if (s.size() == m) pairs.emplace_back(hash_ids(s, 0, m), u);
    }
    x.whole[m].build(pairs);
  }
}

NgramIndex::~NgramIndex() = default;
NgramIndex::NgramIndex(NgramIndex&&) noexcept = default;
NgramIndex& NgramIndex::operator=(NgramIndex&&) noexcept = default;

std::size_t NgramIndex::order() const { return impl_->n; }
std::size_t NgramIndex::unit_count() const { return impl_->units; }
std::size_t NgramIndex::key_count() const { return impl_->grams[impl_->n].keys.size(); }
std::size_t NgramIndex::total_postings() const { return impl_->grams[impl_->n].postings.size(); }

std::vector<std::uint32_t> NgramIndex::postings(std::span<const std::string> gram) const {
  const Impl& x = *impl_;
  if (gram.size() != x.n) throw ValidationError("gram must have exactly " + std::to_string(x.n) + " tokens");
  std::vector<std::uint32_t> ids;
  for (const auto& tok : gram) {
    const auto it = x.vocab.find(tok);
    if (it == x.vocab.end()) return {};
    ids.push_back(it->second);
  }
  std::vector<std::uint32_t> out;
  for (std::uint32_t u : x.grams[x.n].find(hash_ids(ids, 0, x.n))) {
    const Ids s = x.ids(u);
    for (std::size_t i = 0; i + x.n <= s.size(); ++i) {
      if (gram_equal(s, i, ids, 0, x.n)) {
        out.push_back(u);
        break;
      }
    }
  }
  return out;
}

std::span<const std::uint32_t> NgramIndex::units_with_length(std::size_t length) const {
  const Impl& x = *impl_;
  if (length + 1 >= x.length_start.size()) return {};
  return {x.by_length.data() + x.length_start[length], x.by_length.data() + x.length_start[length + 1]};
}

NgramIndex build_ngram_index(const Corpus& train, std::size_t n) { return NgramIndex(train, n); }

// --- query --------------------------------------------------------------------

namespace {

// Largest d in [0, longest] with combine(1 - d / longest, ngram) >= bar, or -1.
long max_distance(double ngram, std::size_t longest, double bar, Combine mode) {
  auto ok = [&](std::size_t d) {
    return combine(lev_similarity_from_distance(d, longest, longest), ngram, mode) >= bar;
  };
  if (!ok(0)) return -1;
  std::size_t lo = 0;
  std::size_t hi = longest;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (ok(mid)) lo = mid;
    else hi = mid - 1;
  }
  return static_cast<long>(lo);
}

struct Best {
  std::size_t index = kNone;
  double combined = 0.0;
  double lev = 0.0;
  double ngram = 0.0;
};

class Searcher {
 public:
  Searcher(const NgramIndex::Impl& index, const DecontamConfig& config)
      : x_(index), config_(config), stamp_(index.units, 0) {}

  SimilarityVerdict run(const TransUnit& unit) {
    if (++generation_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      generation_ = 1;
    }
    const std::u32string chars = text::decode_utf8(unit.source);
    test_ids_.clear();
    std::unordered_map<std::string_view, std::uint32_t> unknown;
    for (std::string_view tok : text::split_whitespace(unit.source)) {
      const auto it = x_.vocab.find(std::string(tok));
      if (it != x_.vocab.end()) {
        test_ids_.push_back(it->second);
      } else {
        const auto fresh = static_cast<std::uint32_t>(x_.vocab.size() + unknown.size());
        test_ids_.push_back(unknown.emplace(tok, fresh).first->second);
      }
    }
    std::array<std::uint8_t, kBuckets> hist{};
    fill_histogram(chars, hist.data());
    std::optional<PatternMasks> masks;
    if (!chars.empty() && chars.size() <= 64) masks.emplace(chars);

    best_ = Best{};
    std::size_t ng_best = kNone;
    double ng_best_value = 0.0;
    const std::size_t la = chars.size();

    gather_candidates();
    for (std::uint32_t s : candidates_) {
      const Ids b = x_.ids(s);
      const double g = ngram_ids(test_ids_, b, config_.ngram_order, ga_, gb_);
      if (g > 0.0 && (ng_best == kNone || g > ng_best_value || (g == ng_best_value && s < ng_best))) {
        ng_best = s;
        ng_best_value = g;
      }
      consider(s, chars, hist.data(), masks ? &*masks : nullptr, g);
    }

    if (la > 0) {
      for (std::size_t lb = la + 1; lb-- > 0;) {
        if (!scan_length(lb, chars, hist.data(), masks ? &*masks : nullptr)) break;
      }
      for (std::size_t lb = la + 1; lb + 1 < x_.length_start.size(); ++lb) {
        if (!scan_length(lb, chars, hist.data(), masks ? &*masks : nullptr)) break;
      }
    }

    SimilarityVerdict v;
    v.test_unit_id = unit.id;
    if (best_.index != kNone) {
      v.best_train_unit_id = train_id(best_.index);
      v.lev_sim = best_.lev;
      v.ngram_sim = best_.ngram;
      v.combined = best_.combined;
      v.dropped = true;
    } else if (ng_best != kNone) {
      const std::u32string_view b = x_.chars(ng_best);
      v.best_train_unit_id = train_id(ng_best);
      v.lev_sim = lev_similarity_from_distance(lev_distance(chars, b), la, b.size());
      v.ngram_sim = ng_best_value;
      v.combined = combine(v.lev_sim, v.ngram_sim, config_.combine);
    }
    return v;
  }

  void set_ids(const Corpus* train) { train_ = train; }

 private:
  std::string train_id(std::size_t u) const { return (*train_)[u].id; }

  void add(std::span<const std::uint32_t> list) {
    for (std::uint32_t u : list) {
      if (stamp_[u] != generation_) {
        stamp_[u] = generation_;
        candidates_.push_back(u);
      }
    }
  }

  // Every train unit sharing a word n-gram at the effective order.
  void gather_candidates() {
    candidates_.clear();
    const std::size_t n = x_.n;
    const Ids t = test_ids_;
    const std::size_t wc = t.size();
    if (wc == 0) {
      add(x_.whole[0].find(hash_ids(t, 0, 0)));
    } else if (wc >= n) {
      for (std::size_t i = 0; i + n <= wc; ++i) add(x_.grams[n].find(hash_ids(t, i, n)));
    } else {
      add(x_.grams[wc].find(hash_ids(t, 0, wc)));
    }
    for (std::size_t m = 1; m < std::min(wc, n); ++m) {
      for (std::size_t i = 0; i + m <= wc; ++i) add(x_.whole[m].find(hash_ids(t, i, m)));
    }
    std::sort(candidates_.begin(), candidates_.end());
  }

  double bar() const { return best_.index == kNone ? config_.threshold : best_.combined; }

  bool could_win(double upper, std::size_t s) const {
    if (!(upper > config_.threshold)) return false;
    if (best_.index == kNone) return true;
    return upper > best_.combined || (upper == best_.combined && s < best_.index);
  }

  void accept(std::size_t s, double lev, double g) {
    const double c = combine(lev, g, config_.combine);
    if (!(c > config_.threshold)) return;
    if (best_.index == kNone || c > best_.combined || (c == best_.combined && s < best_.index)) {
      best_ = Best{s, c, lev, g};
    }
  }

  void consider(std::size_t s, std::u32string_view a, const std::uint8_t* hist, const PatternMasks* masks,
                double g) {
    const std::u32string_view b = x_.chars(s);
    const std::size_t la = a.size();
    const std::size_t lb = b.size();
    const std::size_t gap = la > lb ? la - lb : lb - la;
    const std::size_t longest = std::max(la, lb);
    if (!could_win(combine(lev_similarity_from_distance(gap, la, lb), g, config_.combine), s)) return;
    if (longest == 0) {
      accept(s, 1.0, g);
      return;
    }
    const long k = max_distance(g, longest, bar(), config_.combine);
    if (k < 0 || static_cast<std::size_t>(k) < gap) return;
    const auto kk = static_cast<std::size_t>(k);
    if (bag_bound(hist, x_.histogram(s)) > kk) return;
    const std::size_t d = bounded_distance(a, b, kk, masks);
    if (d > kk) return;
    accept(s, lev_similarity_from_distance(d, la, lb), g);
  }

  // Train units of one length without a shared n-gram; false once the band is exhausted.
  bool scan_length(std::size_t lb, std::u32string_view a, const std::uint8_t* hist, const PatternMasks* masks) {
    const std::size_t la = a.size();
    const std::size_t gap = la > lb ? la - lb : lb - la;
    const std::size_t longest = std::max(la, lb);
    const long k = max_distance(0.0, longest, bar(), config_.combine);
    if (k < 0 || static_cast<std::size_t>(k) < gap) return false;
    if (lb + 1 >= x_.length_start.size()) return true;
    const auto kk = static_cast<std::size_t>(k);
    for (std::uint32_t i = x_.length_start[lb]; i < x_.length_start[lb + 1]; ++i) {
      const std::uint32_t s = x_.by_length[i];
      if (stamp_[s] == generation_) continue;
      if (bag_bound(hist, x_.histogram(s)) > kk) continue;
      const std::size_t d = bounded_distance(a, x_.chars(s), kk, masks);
      if (d > kk) continue;
      const double lev = lev_similarity_from_distance(d, la, lb);
      if (could_win(combine(lev, 0.0, config_.combine), s)) accept(s, lev, 0.0);
    }
    return true;
  }

  const NgramIndex::Impl& x_;
  const DecontamConfig& config_;
  const Corpus* train_ = nullptr;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t generation_ = 0;
  std::vector<std::uint32_t> candidates_;
  std::vector<std::uint32_t> test_ids_;
  std::vector<std::uint32_t> ga_;
  std::vector<std::uint32_t> gb_;
  Best best_;
};

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

DecontamResult decontaminate(const Corpus& test, const NgramIndex& index, const Corpus& train,
                             const DecontamConfig& config, unsigned threads) {
  config.validate();
  if (index.unit_count() != train.size()) throw ValidationError("index was built over a different train set");
  if (index.order() != config.ngram_order) throw ValidationError("index n-gram order differs from config");

  std::vector<SimilarityVerdict> verdicts(test.size());
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, test.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      Searcher searcher(index.impl(), config);
      searcher.set_ids(&train);
      constexpr std::size_t kChunk = 8;
      while (true) {
        const std::size_t begin = next.fetch_add(kChunk);
        if (begin >= test.size()) break;
        const std::size_t end = std::min(test.size(), begin + kChunk);
        for (std::size_t i = begin; i < end; ++i) verdicts[i] = searcher.run(test[i]);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(test.size());
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  DecontamResult result;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& v = verdicts[i];
    if (v.dropped) {
      result.drops.push_back({test[i].id, DropRule::kContaminated,
                              "combined=" + format_score(v.combined) + " with " + v.best_train_unit_id});
    } else {
      result.kept.push_back(test[i]);
    }
  }
  result.kept.metadata = test.metadata;
  result.kept.metadata["decontam.threshold"] = format_score(config.threshold);
  result.kept.metadata["decontam.ngram_order"] = std::to_string(config.ngram_order);
  result.kept.metadata["decontam.combine"] = std::string(to_string(config.combine));
  std::stable_sort(verdicts.begin(), verdicts.end(),
                   [](const auto& a, const auto& b) { return a.test_unit_id < b.test_unit_id; });
  result.verdicts = std::move(verdicts);
  return result;
}

DecontamResult decontaminate(const Corpus& test, const Corpus& train, const DecontamConfig& config,
                             unsigned threads) {
  config.validate();
  const NgramIndex index(train, config.ngram_order);
  return decontaminate(test, index, train, config, threads);
}

std::string verdict_to_json_line(const SimilarityVerdict& v) {
  nlohmann::ordered_json j;
  j["test_unit_id"] = v.test_unit_id;
  j["best_train_unit_id"] = v.best_train_unit_id;
  j["lev_sim"] = v.lev_sim;
  j["ngram_sim"] = v.ngram_sim;
  j["combined"] = v.combined;
  j["dropped"] = v.dropped;
  return j.dump();
}

SimilarityVerdict verdict_from_json_line(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    SimilarityVerdict v;
    v.test_unit_id = j.at("test_unit_id").get<std::string>();
    v.best_train_unit_id = j.at("best_train_unit_id").get<std::string>();
    v.lev_sim = j.at("lev_sim").get<double>();
    v.ngram_sim = j.at("ngram_sim").get<double>();
    v.combined = j.at("combined").get<double>();
    v.dropped = j.at("dropped").get<bool>();
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid verdict line: ") + e.what(), 0);
  }
}

void write_verdicts(const std::filesystem::path& path, const std::vector<SimilarityVerdict>& verdicts) {
  std::string out;
  for (const auto& v : verdicts) {
    out += verdict_to_json_line(v);
    out.push_back('\n');
  }
  write_file(path, out);
}

}  // namespace tmforge::decontam
