#include <gtest/gtest.h>

#include <random>

#include "tmforge/corpus.hpp"
#include "tmforge/error.hpp"

using namespace tmforge;

namespace {

TransUnit unit(std::string id, std::string source, std::map<std::string, std::string> targets) {
  TransUnit u;
  u.id = std::move(id);
  u.source = std::move(source);
  u.source_lang = LangTag::parse("en");
  for (auto& [k, v] : targets) u.targets.emplace(LangTag::parse(k), v);
  u.provenance = {"export.tsv", Domain::kMobileUi};
  return u;
}

Corpus sample() {
  return Corpus({unit("a:0", "Save", {{"de", "Speichern"}, {"fi", "Tallenna"}}),
                 unit("a:1", "Undo \"last\"\tstep", {{"de", "Rückgängig\n"}}),
                 unit("a:2", "설정", {{"ko", "설정 열기"}})});
}

}  // namespace

TEST(LangTag, CanonicalForm) {
  EXPECT_EQ(LangTag::parse("pt-br").code(), "pt-BR");
  EXPECT_EQ(LangTag::parse("PT_BR").code(), "pt-BR");
  EXPECT_EQ(LangTag::parse("de").primary(), "de");
  EXPECT_EQ(LangTag::parse("pt-BR").region(), "BR");
  EXPECT_EQ(LangTag::parse("ko"), LangTag::parse("KO"));
  EXPECT_THROW(LangTag::parse(""), ValidationError);
  EXPECT_THROW(LangTag::parse("e n"), ValidationError);
}

TEST(Corpus, LanguagesFollowUnits) {
  const Corpus c = sample();
  EXPECT_EQ(c.languages().size(), 3u);
  EXPECT_TRUE(c.languages().count(LangTag::parse("ko")));
}

TEST(Corpus, DuplicateIdsRejected) {
  Corpus c = sample();
  c.push_back(unit("a:0", "Again", {{"de", "Nochmal"}}));
  EXPECT_THROW(c.check_unique_ids(), ValidationError);
}

TEST(CorpusDigest, EmptyCorpusIsFixed) {
  EXPECT_EQ(corpus_digest(Corpus{}), sha256_hex(""));
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(CorpusDigest, DeterministicAndContentSensitive) {
  const Corpus a = sample();
  EXPECT_EQ(corpus_digest(a), corpus_digest(sample()));
  auto units = a.units();
  units[1].targets.begin()->second[0] = 'r';
  EXPECT_NE(corpus_digest(a), corpus_digest(Corpus(units)));
}

TEST(CorpusDigest, IgnoresMetadataButNotOrder) {
  Corpus a = sample();
  Corpus b = sample();
  b.metadata["x"] = "y";
  EXPECT_EQ(corpus_digest(a), corpus_digest(b));
  auto units = a.units();
  std::swap(units[0], units[2]);
  EXPECT_NE(corpus_digest(a), corpus_digest(Corpus(units)));
}

TEST(CorpusDigest, LengthPrefixingSeparatesFields) {
  const Corpus a({unit("x", "ab", {{"de", "c"}})});
  const Corpus b({unit("x", "a", {{"de", "bc"}})});
  EXPECT_NE(corpus_digest(a), corpus_digest(b));
}

TEST(CorpusJson, RoundTrip) {
  const Corpus a = sample();
  const std::string text = corpus_to_jsonl(a);
  EXPECT_EQ(corpus_from_jsonl(text), a);
  EXPECT_EQ(text.substr(0, 15), "{\"id\":\"a:0\",\"so");
}

TEST(CorpusJson, RandomRoundTrip) {
  std::mt19937 rng(7);
  const std::string alphabet[] = {"a", "Z", " ", "\t", "\"", "\\", "\n", "é", "설", "\x01", "{", "}"};
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<TransUnit> units;
    for (int i = 0; i < 5; ++i) {
      auto text = [&] {
        std::string s = "s";
        for (int k = 0; k < 8; ++k) s += alphabet[rng() % 12];
        return s;
      };
      units.push_back(unit("f:" + std::to_string(i), text(), {{"de", text()}}));
    }
    const Corpus c(units);
    EXPECT_EQ(corpus_from_jsonl(corpus_to_jsonl(c)), c);
  }
}

TEST(CorpusJson, BadLineReportsError) {
  EXPECT_THROW(corpus_from_jsonl("{\"id\": 3}\n"), ValidationError);
  EXPECT_THROW(corpus_from_jsonl("not json\n"), ValidationError);
}

TEST(DropLog, RoundTrip) {
  const std::vector<DropRecord> drops = {{"a:1", DropRule::kDuplicate, "of a:0"},
                                         {"a:2", DropRule::kContaminated, "combined=1"}};
  const auto dir = std::filesystem::temp_directory_path() / "tmforge_drop_test";
  write_drop_log(dir / "d.jsonl", drops);
  EXPECT_EQ(read_drop_log(dir / "d.jsonl"), drops);
  std::filesystem::remove_all(dir);
}

TEST(DropRule, NamesRoundTrip) {
  for (auto r : {DropRule::kDuplicate, DropRule::kSourceCopy, DropRule::kOverLength, DropRule::kNonContent,
                 DropRule::kEmptyAfterClean, DropRule::kMissingTarget, DropRule::kContaminated}) {
    EXPECT_EQ(parse_drop_rule(to_string(r)), r);
  }
}

TEST(SplitManifest, JsonRoundTrip) {
  SplitManifest m;
  m.seed = 18446744073709551615ULL;
  m.counts = {14688, 1837, 1837};
  m.subset_sizes = {1000, 2000};
  m.checksum = "abc";
  m.prng = "splitmix64";
  m.choices["k"] = "v";
  EXPECT_EQ(manifest_from_json(manifest_to_json(m)), m);
}

TEST(Files, MissingFileIsIoError) {
  EXPECT_THROW(read_file("/nonexistent/tmforge/file"), IoError);
}
