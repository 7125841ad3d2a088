#include "tmforge/partition.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "tmforge/error.hpp"
#include "tmforge/ingest.hpp"
#include "tmforge/log.hpp"

namespace tmforge::partition {

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  // Reject the low `2^64 mod bound` values so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

AlignResult interlingual_align(const std::map<LangTag, Corpus>& corpora) {
  AlignResult result;
  if (corpora.empty()) return result;

  for (const auto& [lang, _] : corpora) result.aligned.languages.push_back(lang);

  // Per language: normalized source -> first translation.
  std::vector<std::unordered_map<std::string, const std::string*>> by_lang;
  by_lang.reserve(corpora.size());
  LangTag source_lang;
  bool have_source_lang = false;
  for (const auto& [lang, corpus] : corpora) {
    auto& index = by_lang.emplace_back();
    index.reserve(corpus.size());
    for (const auto& u : corpus.units()) {
      if (!have_source_lang) {
        source_lang = u.source_lang;
        have_source_lang = true;
      } else if (u.source_lang != source_lang) {
        throw ValidationError("alignment inputs disagree on source language: " + source_lang.code() +
                              " vs " + u.source_lang.code() + " (unit '" + u.id + "')");
      }
      const std::string* t = u.target(lang);
      if (t == nullptr || t->empty()) continue;
      auto [it, inserted] = index.emplace(ingest::normalize_whitespace(u.source), t);
      if (!inserted && *it->second != *t) {
        log::warn("align_conflicting_translation",
                  {{"lang", lang.code()}, {"unit_id", u.id}, {"kept", *it->second}, {"ignored", *t}});
      }
    }
  }

  // Every source seen in any corpus, in first-appearance order across the map.
  std::unordered_set<std::string> emitted;
  const Corpus& lead = corpora.begin()->second;

  auto consider = [&](const TransUnit& u) {
    std::string key = ingest::normalize_whitespace(u.source);
    if (!emitted.insert(key).second) return;
    std::vector<std::string> missing;
    std::size_t li = 0;
    for (const auto& [lang, _] : corpora) {
      if (by_lang[li].find(key) == by_lang[li].end()) missing.push_back(lang.code());
      ++li;
    }
    if (!missing.empty()) {
      std::string detail = "missing:";
      for (const auto& m : missing) detail += " " + m;
      result.drops.push_back({u.id, DropRule::kMissingTarget, std::move(detail)});
      return;
    }
    TransUnit out;
    out.id = u.id;
    out.source = u.source;
    out.source_lang = u.source_lang;
    out.provenance = u.provenance;
    li = 0;
    for (const auto& [lang, _] : corpora) out.targets.emplace(lang, *by_lang[li++].at(key));
    result.aligned.corpus.push_back(std::move(out));
  };

  for (const auto& u : lead.units()) consider(u);
  for (auto it = std::next(corpora.begin()); it != corpora.end(); ++it) {
    for (const auto& u : it->second.units()) consider(u);
  }
  return result;
}

Corpus seeded_shuffle(const Corpus& corpus, std::uint64_t seed) {
  std::vector<TransUnit> units = corpus.units();
  SplitMix64 rng(seed);
  for (std::size_t i = units.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(units[i - 1], units[j]);
  }
  Corpus out(std::move(units));
  out.metadata = corpus.metadata;
  out.metadata["shuffle.seed"] = std::to_string(seed);
  out.metadata["shuffle.prng"] = std::string(kShuffleId);
  return out;
}

void validate_ratios(const SplitRatios& r) {
  if (!(r.train > 0) || !(r.dev > 0) || !(r.test > 0)) {
    throw ValidationError("split ratios must be positive");
  }
  if (std::fabs(r.train + r.dev + r.test - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }
}

namespace {

// ceil(ratio * n), tolerant of representation error (0.1 * 30 = 3.0000000000000004).
std::size_t ceil_share(double ratio, std::size_t n) {
  const long double x = static_cast<long double>(ratio) * static_cast<long double>(n);
  return static_cast<std::size_t>(std::ceil(x - 1e-9L));
}

}  // namespace

SplitCounts split_counts(std::size_t n, const SplitRatios& ratios) {
  validate_ratios(ratios);
  if (n < 3) throw ValidationError("cannot split " + std::to_string(n) + " units into three non-empty sets");
  SplitCounts c;
  c.dev = ceil_share(ratios.dev, n);
  c.test = ceil_share(ratios.test, n);
  if (c.dev + c.test >= n) {
    throw ValidationError("ratios leave no training units for N = " + std::to_string(n));
  }
  c.train = n - c.dev - c.test;
  return c;
}

SplitResult split(const Corpus& corpus, const SplitRatios& ratios) {
  const SplitCounts counts = split_counts(corpus.size(), ratios);
  SplitResult r;
  const auto& units = corpus.units();
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i < counts.train) r.train.push_back(units[i]);
    else if (i < counts.train + counts.dev) r.dev.push_back(units[i]);
    else r.test.push_back(units[i]);
  }
  r.manifest.ratios = ratios;
  r.manifest.counts = counts;
  r.manifest.checksum = corpus_digest(corpus);
  r.manifest.prng = std::string(kShuffleId);
  if (const auto it = corpus.metadata.find("shuffle.seed"); it != corpus.metadata.end()) {
    r.manifest.seed = std::stoull(it->second);
  }
  r.manifest.choices["split.rule"] = "dev=ceil(dev*N),test=ceil(test*N),train=rest;order=train|dev|test";
  return r;
}

std::vector<Corpus> nested_subsets(const Corpus& train, const std::vector<std::size_t>& sizes) {
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw ValidationError("subset size must be >= 1");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw ValidationError("subset sizes must be strictly ascending");
    if (sizes[i] > train.size()) {
      throw ValidationError("subset size " + std::to_string(sizes[i]) + " exceeds train size " +
                            std::to_string(train.size()));
    }
  }
  std::vector<Corpus> out;
  out.reserve(sizes.size());
  for (std::size_t size : sizes) {
    std::vector<TransUnit> prefix(train.units().begin(),
                                  train.units().begin() + static_cast<std::ptrdiff_t>(size));
    out.emplace_back(std::move(prefix));
  }
  return out;
}

Corpus full_language_extract(const std::map<LangTag, Corpus>& corpora, const Corpus& aligned_dev,
                             const Corpus& aligned_test, const LangTag& lang) {
  const auto it = corpora.find(lang);
  if (it == corpora.end()) throw ValidationError("no corpus for language " + lang.code());
  std::unordered_set<std::string> held_out;
  for (const Corpus* c : {&aligned_dev, &aligned_test}) {
    for (const auto& u : c->units()) held_out.insert(ingest::normalize_whitespace(u.source));
  }
  Corpus out;
  for (const auto& u : it->second.units()) {
    if (held_out.count(ingest::normalize_whitespace(u.source)) == 0) out.push_back(u);
  }
  return out;
}

}  // namespace tmforge::partition
