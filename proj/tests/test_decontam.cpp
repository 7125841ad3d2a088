#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "synth.hpp"
#include "tmforge/decontam.hpp"
#include "tmforge/error.hpp"
#include "tmforge/text.hpp"

using namespace tmforge;
using namespace tmforge::decontam;

namespace {

std::string random_text(std::mt19937& rng, const std::vector<std::string>& alphabet, std::size_t max_len) {
  std::string s;
  for (std::size_t i = 0, n = rng() % (max_len + 1); i < n; ++i) s += alphabet[rng() % alphabet.size()];
  return s;
}

}  // namespace

TEST(Levenshtein, SpecExamples) {
  EXPECT_EQ(lev_distance("", "abc"), 3u);
  EXPECT_EQ(lev_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(lev_distance("same", "same"), 0u);
  EXPECT_EQ(lev_distance("설정", "설명"), 1u);
  EXPECT_DOUBLE_EQ(lev_similarity("abcd", "wxyz"), 0.0);
  EXPECT_NEAR(lev_similarity("kitten", "sitting"), 1.0 - 3.0 / 7.0, 1e-12);
  EXPECT_DOUBLE_EQ(lev_similarity("", ""), 1.0);
}

TEST(Levenshtein, MatchesDpOracle) {
  std::mt19937 rng(1);
  const std::vector<std::string> alphabet = {"a", "b", "c", " ", "é", "설", "x"};
  for (int i = 0; i < 3000; ++i) {
    const std::string a = random_text(rng, alphabet, i % 10 == 0 ? 90 : 12);
    const std::string b = random_text(rng, alphabet, i % 10 == 0 ? 90 : 12);
    const auto ua = text::decode_utf8(a);
    const auto ub = text::decode_utf8(b);
    const std::size_t d = oracle::dp_levenshtein(ua, ub);
    ASSERT_EQ(lev_distance(a, b), d) << a << " | " << b;
    EXPECT_EQ(lev_distance(b, a), d);
    for (std::size_t k : {std::size_t{0}, d / 2, d, d + 3}) {
      const std::size_t bd = lev_distance_bounded(ua, ub, k);
      if (d <= k) EXPECT_EQ(bd, d);
      else EXPECT_GT(bd, k);
    }
  }
}

TEST(Levenshtein, TriangleInequality) {
  std::mt19937 rng(2);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d"};
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_text(rng, alphabet, 10), b = random_text(rng, alphabet, 10), c = random_text(rng, alphabet, 10);
    EXPECT_LE(lev_distance(a, c), lev_distance(a, b) + lev_distance(b, c));
  }
}

TEST(NgramSimilarity, SpecExamples) {
  EXPECT_DOUBLE_EQ(ngram_similarity("a b c d e f", "a b c d e f", 5), 1.0);
  EXPECT_DOUBLE_EQ(ngram_similarity("a b c", "x y z", 5), 0.0);
  EXPECT_DOUBLE_EQ(ngram_similarity("the quick brown fox jumps over", "the quick brown fox leaps over", 5), 0.0);
  EXPECT_DOUBLE_EQ(ngram_similarity("", "", 5), 1.0);
  EXPECT_DOUBLE_EQ(ngram_similarity("", "a", 5), 0.0);
  EXPECT_DOUBLE_EQ(ngram_similarity("open file", "open file now", 5), 1.0 / 2.0);
  EXPECT_THROW(ngram_similarity("a", "a", 0), ValidationError);
}

TEST(NgramSimilarity, MatchesOracle) {
  std::mt19937 rng(3);
  const std::vector<std::string> alphabet = {"a ", "b ", "c ", "a", "  "};
  for (int i = 0; i < 3000; ++i) {
    const auto a = random_text(rng, alphabet, 14), b = random_text(rng, alphabet, 14);
    for (std::size_t n : {1u, 2u, 3u, 5u}) {
      const double g = ngram_similarity(a, b, n);
      EXPECT_DOUBLE_EQ(g, oracle::ngram_jaccard(a, b, n)) << a << " | " << b;
      EXPECT_GE(g, 0.0);
      EXPECT_LE(g, 1.0);
    }
  }
}

TEST(Combined, SpecExamples) {
  DecontamConfig cfg;
  EXPECT_DOUBLE_EQ(combined_similarity("same text", "same text", cfg), 1.0);
  EXPECT_NEAR(combined_similarity("kitten", "sitting", cfg), 0.5714285714, 1e-9);
  cfg.combine = Combine::kMean;
  EXPECT_DOUBLE_EQ(combined_similarity("same text", "same text", cfg), 1.0);
  EXPECT_NEAR(combined_similarity("kitten", "sitting", cfg), 0.2857142857, 1e-9);
  EXPECT_DOUBLE_EQ(combined_similarity("", "abc", DecontamConfig{}), 0.0);
}

TEST(Config, Validation) {
  DecontamConfig c;
  c.threshold = 1.5;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.ngram_order = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_EQ(parse_combine("mean"), Combine::kMean);
  EXPECT_THROW(parse_combine("min"), ValidationError);
}

TEST(Index, EmptyAndShared) {
  EXPECT_EQ(build_ngram_index(Corpus{}, 5).unit_count(), 0u);
  EXPECT_EQ(build_ngram_index(Corpus{}, 5).key_count(), 0u);
  const Corpus train({synth::unit("a", "one two three four five six"), synth::unit("b", "zero one two three four five"),
                      synth::unit("c", "unrelated")});
  const NgramIndex idx = build_ngram_index(train, 5);
  const std::vector<std::string> gram = {"one", "two", "three", "four", "five"};
  EXPECT_EQ(idx.postings(gram), (std::vector<std::uint32_t>{0, 1}));
  EXPECT_TRUE(idx.postings(std::vector<std::string>{"a", "b", "c", "d", "e"}).empty());
  EXPECT_EQ(idx.units_with_length(9).size(), 1u);
}

TEST(Decontaminate, IdenticalDroppedDisjointKept) {
  const Corpus train({synth::unit("tr:0", "Open the settings menu"), synth::unit("tr:1", "Delete account")});
  const Corpus test({synth::unit("te:0", "Open the settings menu"), synth::unit("te:1", "xyzzy quux")});
  const auto r = decontaminate(test, train);
  ASSERT_EQ(r.drops.size(), 1u);
  EXPECT_EQ(r.drops[0].unit_id, "te:0");
  EXPECT_EQ(r.drops[0].rule, DropRule::kContaminated);
  EXPECT_DOUBLE_EQ(r.verdicts[0].combined, 1.0);
  EXPECT_EQ(r.verdicts[0].best_train_unit_id, "tr:0");
  EXPECT_EQ(r.kept.size(), 1u);
  EXPECT_EQ(r.kept[0].id, "te:1");
  EXPECT_EQ(r.verdicts[1].best_train_unit_id, "");
}

TEST(Decontaminate, ExactBoundaryKept) {
  const Corpus train({synth::unit("tr:0", "abcd")});
  const Corpus test({synth::unit("te:0", "abce")});
  const auto r = decontaminate(test, train);
  EXPECT_DOUBLE_EQ(oracle::lev_sim("abcd", "abce"), 0.75);
  EXPECT_TRUE(r.drops.empty());
  EXPECT_EQ(r.kept.size(), 1u);
}

TEST(Decontaminate, ThresholdOneDropsNothing) {
  const auto p = synth::planted(17, 200, 60);
  DecontamConfig cfg;
  cfg.threshold = 1.0;
  const auto r = decontaminate(p.test, p.train, cfg);
  EXPECT_TRUE(r.drops.empty());
}

TEST(Decontaminate, OracleEquivalenceSmall) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto p = synth::planted(seed, 60 + seed * 7, 30);
    for (auto mode : {Combine::kMax, Combine::kMean}) {
      for (double threshold : {0.5, 0.75, 0.9}) {
        DecontamConfig cfg;
        cfg.combine = mode;
        cfg.threshold = threshold;
        cfg.ngram_order = 1 + seed % 5;
        const auto got = decontaminate(p.test, p.train, cfg, 1 + seed % 3);
        const auto want = oracle::brute_force_decontam(p.test, p.train, cfg);
        ASSERT_EQ(got.verdicts.size(), want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
          const auto& g = got.verdicts[i];
          const auto& w = want[i];
          ASSERT_EQ(g.test_unit_id, w.test_unit_id);
          EXPECT_EQ(g.dropped, w.dropped) << g.test_unit_id << " seed " << seed;
          EXPECT_EQ(g.best_train_unit_id, w.best_train_unit_id) << g.test_unit_id << " seed " << seed;
          EXPECT_DOUBLE_EQ(g.lev_sim, w.lev_sim);
          EXPECT_DOUBLE_EQ(g.ngram_sim, w.ngram_sim);
          EXPECT_DOUBLE_EQ(g.combined, w.combined);
        }
      }
    }
  }
}

TEST(Decontaminate, MonotoneInThreshold) {
  const auto p = synth::planted(99, 300, 80);
  std::size_t prev = p.test.size() + 1;
  for (double t = 0.0; t <= 1.0; t += 0.125) {
    DecontamConfig cfg;
    cfg.threshold = t;
    const std::size_t drops = decontaminate(p.test, p.train, cfg).drops.size();
    EXPECT_LE(drops, prev);
    prev = drops;
  }
}

TEST(Decontaminate, ThreadCountDoesNotChangeResult) {
  const auto p = synth::planted(5, 400, 100);
  const auto a = decontaminate(p.test, p.train, {}, 1);
  const auto b = decontaminate(p.test, p.train, {}, 4);
  EXPECT_EQ(a.verdicts, b.verdicts);
  EXPECT_EQ(a.kept, b.kept);
  EXPECT_EQ(a.drops, b.drops);
}

TEST(Verdicts, JsonRoundTrip) {
  const SimilarityVerdict v{"te:1", "tr:9", 0.8125, 0.25, 0.8125, true};
  EXPECT_EQ(verdict_from_json_line(verdict_to_json_line(v)), v);
}
