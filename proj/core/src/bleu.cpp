#include <cmath>
#include <unordered_map>

#include "tmforge/error.hpp"
#include "tmforge/metrics.hpp"
#include "tmforge/text.hpp"

namespace tmforge::metrics {

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (correct.size() < other.correct.size()) {
    correct.resize(other.correct.size(), 0);
    total.resize(other.total.size(), 0);
  }
  for (std::size_t i = 0; i < other.correct.size(); ++i) {
    correct[i] += other.correct[i];
    total[i] += other.total[i];
  }
  sys_len += other.sys_len;
  ref_len += other.ref_len;
  return *this;
}

namespace {

std::vector<std::string> bleu_tokens(std::string_view s, const BleuConfig& config) {
  std::string line = config.case_sensitive ? std::string(s) : text::to_lower(s);
  line = std::string(text::rstrip(line));
  if (config.tokenizer == "13a") return tokenize_13a(line);
  std::vector<std::string> out;
  for (std::string_view tok : text::split_whitespace(line)) out.emplace_back(tok);
  return out;
}

std::unordered_map<std::string, std::int64_t> ngram_counts(const std::vector<std::string>& toks, int n) {
  std::unordered_map<std::string, std::int64_t> out;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= toks.size(); ++i) {
    std::string key = toks[i];
    for (int k = 1; k < n; ++k) {
      key.push_back(' ');
      key += toks[i + static_cast<std::size_t>(k)];
    }
    ++out[key];
  }
  return out;
}

double my_log(double x) { return x == 0.0 ? -9999999999.0 : std::log(x); }

}  // namespace

BleuStats bleu_sentence_stats(std::string_view hypothesis, std::string_view reference, const BleuConfig& config) {
  const auto hyp = bleu_tokens(hypothesis, config);
  const auto ref = bleu_tokens(reference, config);
  const auto order = static_cast<std::size_t>(config.max_ngram_order);
  BleuStats s;
  s.correct.assign(order, 0);
  s.total.assign(order, 0);
  s.sys_len = static_cast<std::int64_t>(hyp.size());
  s.ref_len = static_cast<std::int64_t>(ref.size());
  for (std::size_t n = 1; n <= order; ++n) {
    const auto h = ngram_counts(hyp, static_cast<int>(n));
    const auto r = ngram_counts(ref, static_cast<int>(n));
    for (const auto& [gram, count] : h) {
      s.total[n - 1] += count;
      if (const auto it = r.find(gram); it != r.end()) s.correct[n - 1] += std::min(count, it->second);
    }
  }
  return s;
}

BleuResult bleu_from_stats(const BleuStats& stats, const BleuConfig& config) {
  const auto order = static_cast<std::size_t>(config.max_ngram_order);
  BleuResult r;
  r.precisions.assign(order, 0.0);
  if (stats.sys_len < stats.ref_len) {
    r.brevity_penalty = stats.sys_len > 0
                            ? std::exp(1.0 - static_cast<double>(stats.ref_len) / static_cast<double>(stats.sys_len))
                            : 0.0;
  }
  bool any = false;
  for (std::size_t n = 0; n < order && n < stats.correct.size(); ++n) any = any || stats.correct[n] != 0;
  if (!any) return r;

  double smooth = 1.0;
  for (std::size_t n = 0; n < order; ++n) {
    const std::int64_t total = n < stats.total.size() ? stats.total[n] : 0;
    const std::int64_t correct = n < stats.correct.size() ? stats.correct[n] : 0;
    if (total == 0) break;
    if (correct == 0) {
      if (config.smoothing == "exp") {
        smooth *= 2;
        r.precisions[n] = 100.0 / (smooth * static_cast<double>(total));
      }
    } else {
      r.precisions[n] = 100.0 * static_cast<double>(correct) / static_cast<double>(total);
    }
  }
  double sum = 0.0;
  for (double p : r.precisions) sum += my_log(p);
  r.score = r.brevity_penalty * std::exp(sum / static_cast<double>(order));
  return r;
}

}  // namespace tmforge::metrics
