#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "tmforge/error.hpp"
#include "tmforge/partition.hpp"

using namespace tmforge;
using namespace tmforge::partition;

namespace {

TransUnit unit(const std::string& id, const std::string& source, const std::string& lang, const std::string& target) {
  TransUnit u;
  u.id = id;
  u.source = source;
  u.source_lang = LangTag::parse("en");
  u.targets.emplace(LangTag::parse(lang), target);
  return u;
}

Corpus numbered(std::size_t n) {
  std::vector<TransUnit> units;
  for (std::size_t i = 0; i < n; ++i) units.push_back(unit("c:" + std::to_string(i), "s" + std::to_string(i), "de", "t" + std::to_string(i)));
  return Corpus(units);
}

std::vector<std::string> ids(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& u : c.units()) out.push_back(u.id);
  return out;
}

}  // namespace

TEST(SplitMix64, ReferenceVector) {
  SplitMix64 g(1234567);
  // Outputs of the published reference implementation for seed 1234567.
  EXPECT_EQ(g.next(), 6457827717110365317ULL);
  EXPECT_EQ(g.next(), 3203168211198807973ULL);
  EXPECT_EQ(g.next(), 9817491932198370423ULL);
}

TEST(SplitMix64, BelowIsInRange) {
  SplitMix64 g(9);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(g.below(7), 7u);
}

TEST(Align, AllLanguagesJoin) {
  std::map<LangTag, Corpus> corpora;
  for (const char* l : {"pt-BR", "cs", "de", "fi", "ko"}) corpora[LangTag::parse(l)] = Corpus({unit(std::string(l) + ":0", "Save", l, std::string("Save-") + l)});
  const auto r = interlingual_align(corpora);
  ASSERT_EQ(r.aligned.corpus.size(), 1u);
  EXPECT_EQ(r.aligned.corpus[0].targets.size(), 5u);
  EXPECT_TRUE(r.drops.empty());
}

TEST(Align, MissingLanguageDropped) {
  std::map<LangTag, Corpus> corpora;
  for (const char* l : {"pt-BR", "cs", "de", "fi"}) {
    corpora[LangTag::parse(l)] = Corpus({unit(std::string(l) + ":0", "Save", l, "x"), unit(std::string(l) + ":1", "Undo", l, "y")});
  }
  corpora[LangTag::parse("ko")] = Corpus({unit("ko:0", "Save", "ko", "저장")});
  const auto r = interlingual_align(corpora);
  ASSERT_EQ(r.aligned.corpus.size(), 1u);
  ASSERT_EQ(r.drops.size(), 1u);
  EXPECT_EQ(r.drops[0].rule, DropRule::kMissingTarget);
}

TEST(Align, SizeEqualsSourceIntersection) {
  std::mt19937 rng(21);
  for (int iter = 0; iter < 200; ++iter) {
    std::map<LangTag, Corpus> corpora;
    std::vector<std::set<std::string>> sets;
    for (const char* l : {"cs", "de", "fi"}) {
      std::vector<TransUnit> units;
      std::set<std::string> seen;
      for (int i = 0, n = static_cast<int>(rng() % 15); i < n; ++i) {
        const std::string s = "src " + std::to_string(rng() % 12);
        units.push_back(unit(std::string(l) + ":" + std::to_string(i), s, l, "t" + std::to_string(i)));
        seen.insert(s);
      }
      corpora[LangTag::parse(l)] = Corpus(units);
      sets.push_back(seen);
    }
    std::size_t expected = 0;
    for (const auto& s : sets[0]) expected += sets[1].count(s) && sets[2].count(s);
    EXPECT_EQ(interlingual_align(corpora).aligned.corpus.size(), expected);
  }
}

TEST(Shuffle, DeterministicPermutation) {
  const Corpus c = numbered(100);
  const Corpus a = seeded_shuffle(c, 1);
  EXPECT_EQ(a, seeded_shuffle(c, 1));
  EXPECT_NE(ids(a), ids(seeded_shuffle(c, 2)));
  auto sorted = ids(a);
  auto orig = ids(c);
  std::sort(sorted.begin(), sorted.end());
  std::sort(orig.begin(), orig.end());
  EXPECT_EQ(sorted, orig);
  EXPECT_EQ(a.metadata.at("shuffle.seed"), "1");
  EXPECT_EQ(a.metadata.at("shuffle.prng"), std::string(kShuffleId));
}

TEST(Shuffle, PinnedOrder) {
  // Independent reference run of the descending Fisher-Yates over seed 42.
  const std::vector<int> expect = {3, 1, 6, 2, 4, 0, 7, 5};
  const Corpus s = seeded_shuffle(numbered(8), 42);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(s[i].id, "c:" + std::to_string(expect[i]));
}

TEST(Shuffle, Singleton) {
  EXPECT_EQ(seeded_shuffle(numbered(1), 99), numbered(1));
}

TEST(Split, TableCounts) {
  EXPECT_EQ(split_counts(18362, {}), (SplitCounts{14688, 1837, 1837}));
  EXPECT_EQ(split_counts(10, {}), (SplitCounts{8, 1, 1}));
  EXPECT_EQ(split_counts(11, {}), (SplitCounts{7, 2, 2}));
  EXPECT_THROW(split_counts(2, {}), ValidationError);
  EXPECT_THROW(split(numbered(5), SplitRatios{0.5, 0.3, 0.3}), ValidationError);
}

TEST(Split, CeilRuleProperty) {
  for (std::size_t n = 3; n < 2000; n += 7) {
    const auto c = split_counts(n, {});
    EXPECT_EQ(c.dev, static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n) - 1e-9)));
    EXPECT_EQ(c.train + c.dev + c.test, n);
  }
}

TEST(Split, DisjointContiguousSlices) {
  const Corpus c = seeded_shuffle(numbered(57), 3);
  const auto r = split(c);
  EXPECT_EQ(r.train.size() + r.dev.size() + r.test.size(), 57u);
  std::set<std::string> all;
  for (const auto* part : {&r.train, &r.dev, &r.test}) {
    for (const auto& u : part->units()) EXPECT_TRUE(all.insert(u.id).second);
  }
  EXPECT_EQ(r.train[0].id, c[0].id);
  EXPECT_EQ(r.dev[0].id, c[r.train.size()].id);
  EXPECT_EQ(r.test[r.test.size() - 1].id, c[56].id);
  EXPECT_EQ(r.manifest.counts, (SplitCounts{r.train.size(), r.dev.size(), r.test.size()}));
}

TEST(Subsets, NestedPrefixes) {
  const Corpus train = numbered(14688);
  const auto subs = nested_subsets(train, {1000, 2000, 5000, 10000, 14688});
  ASSERT_EQ(subs.size(), 5u);
  for (std::size_t k = 0; k < subs.size(); ++k) {
    for (std::size_t i = 0; i < subs[k].size(); ++i) ASSERT_EQ(subs[k][i].id, train[i].id);
  }
  EXPECT_EQ(subs[4], train);
  EXPECT_EQ(nested_subsets(train, {1})[0][0].id, train[0].id);
  EXPECT_THROW(nested_subsets(train, {20000}), ValidationError);
  EXPECT_THROW(nested_subsets(train, {2000, 1000}), ValidationError);
}

TEST(FullExtract, LeakageGuard) {
  const LangTag de = LangTag::parse("de");
  std::map<LangTag, Corpus> corpora;
  corpora[de] = Corpus({unit("d:0", "a", "de", "A"), unit("d:1", "b", "de", "B"), unit("d:2", "c  ", "de", "C")});
  EXPECT_EQ(full_language_extract(corpora, Corpus{}, Corpus{}, de).size(), 3u);
  const Corpus test({unit("t:0", "c", "de", "C")});
  const Corpus extract = full_language_extract(corpora, Corpus{}, test, de);
  EXPECT_EQ(ids(extract), (std::vector<std::string>{"d:0", "d:1"}));
}
