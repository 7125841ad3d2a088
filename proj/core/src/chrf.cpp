#include <unordered_map>

#include "tmforge/metrics.hpp"
#include "tmforge/text.hpp"

namespace tmforge::metrics {

ChrfStats& ChrfStats::operator+=(const ChrfStats& other) {
  if (hyp.size() < other.hyp.size()) {
    hyp.resize(other.hyp.size(), 0);
    ref.resize(other.ref.size(), 0);
    match.resize(other.match.size(), 0);
  }
  for (std::size_t i = 0; i < other.hyp.size(); ++i) {
    hyp[i] += other.hyp[i];
    ref[i] += other.ref[i];
    match[i] += other.match[i];
  }
  return *this;
}

namespace {

template <typename Key>
void add_match(const std::unordered_map<Key, std::int64_t>& h, const std::unordered_map<Key, std::int64_t>& r,
               ChrfStats& out) {
  std::int64_t hyp_count = 0;
  std::int64_t ref_count = 0;
  std::int64_t match = 0;
  for (const auto& [g, c] : h) {
    hyp_count += c;
    if (const auto it = r.find(g); it != r.end()) match += std::min(c, it->second);
  }
  for (const auto& [g, c] : r) ref_count += c;
  out.hyp.push_back(r.empty() ? 0 : hyp_count);
  out.ref.push_back(ref_count);
  out.match.push_back(match);
}

std::u32string without_whitespace(std::string_view s) {
  std::u32string out;
  for (char32_t c : text::decode_utf8(s)) {
    if (!text::is_space(c)) out.push_back(c);
  }
  return out;
}

std::unordered_map<std::u32string, std::int64_t> char_ngrams(const std::u32string& s, std::size_t n) {
  std::unordered_map<std::u32string, std::int64_t> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++out[s.substr(i, n)];
  return out;
}

std::unordered_map<std::string, std::int64_t> word_ngrams(const std::vector<std::string>& w, std::size_t n) {
  std::unordered_map<std::string, std::int64_t> out;
  for (std::size_t i = 0; i + n <= w.size(); ++i) {
    std::string key = w[i];
    for (std::size_t k = 1; k < n; ++k) {
      key.push_back(' ');
      key += w[i + k];
    }
    ++out[key];
  }
  return out;
}

}  // namespace

ChrfStats chrf_sentence_stats(std::string_view hypothesis, std::string_view reference, const ChrfConfig& config) {
  ChrfStats s;
  const std::u32string hc = without_whitespace(hypothesis);
  const std::u32string rc = without_whitespace(reference);
  for (int n = 1; n <= config.char_order; ++n) {
    add_match(char_ngrams(hc, static_cast<std::size_t>(n)), char_ngrams(rc, static_cast<std::size_t>(n)), s);
  }
  if (config.word_order > 0) {
    const auto hw = chrf_words(hypothesis);
    const auto rw = chrf_words(reference);
    for (int n = 1; n <= config.word_order; ++n) {
      add_match(word_ngrams(hw, static_cast<std::size_t>(n)), word_ngrams(rw, static_cast<std::size_t>(n)), s);
    }
  }
  return s;
}

double chrf_from_stats(const ChrfStats& stats, const ChrfConfig& config) {
  constexpr double kEps = 1e-16;
  const double factor = config.beta * config.beta;
  double avg_prec = 0.0;
  double avg_rec = 0.0;
  int effective = 0;
  for (std::size_t i = 0; i < stats.hyp.size(); ++i) {
    const auto h = stats.hyp[i];
    const auto r = stats.ref[i];
    const auto m = stats.match[i];
    const double prec = h > 0 ? static_cast<double>(m) / static_cast<double>(h) : kEps;
    const double rec = r > 0 ? static_cast<double>(m) / static_cast<double>(r) : kEps;
    if (h > 0 && r > 0) {
      avg_prec += prec;
      avg_rec += rec;
      ++effective;
    }
  }
  if (effective == 0) {
    avg_prec = avg_rec = 0.0;
  } else {
    avg_prec /= effective;
    avg_rec /= effective;
  }
  if (avg_prec + avg_rec == 0.0) return 0.0;
  double score = (1 + factor) * avg_prec * avg_rec;
  score /= (factor * avg_prec) + avg_rec;
  return 100 * score;
}

}  // namespace tmforge::metrics
