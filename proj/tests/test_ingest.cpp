#include <gtest/gtest.h>

#include <random>

#include "tmforge/error.hpp"
#include "tmforge/ingest.hpp"
#include "tmforge/log.hpp"
#include "tmforge/text.hpp"

using namespace tmforge;
using namespace tmforge::ingest;

namespace {
const LangTag kEn = LangTag::parse("en");
const LangTag kDe = LangTag::parse("de");
const LangTag kFi = LangTag::parse("fi");
}  // namespace

TEST(Text, Utf8DecodeRejectsInvalid) {
  EXPECT_EQ(text::decode_utf8("a설"), U"a설");
  EXPECT_EQ(text::find_invalid_utf8("ab\xff"), 2u);
  EXPECT_EQ(text::find_invalid_utf8("\xc0\xaf"), 0u);
  EXPECT_EQ(text::find_invalid_utf8("\xed\xa0\x80"), 0u);
  EXPECT_THROW(text::decode_utf8("ok\x80"), ParseError);
}

TEST(Text, SplitWhitespaceMatchesPython) {
  const auto w = text::split_whitespace("  a b\tc　d \n");
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(w[1], "b");
  EXPECT_EQ(w[3], "d");
}

TEST(StripHtml, SpecExamples) {
  EXPECT_EQ(strip_html("<p>Hello</p>"), "Hello");
  EXPECT_EQ(strip_html("A &amp; B"), "A & B");
  EXPECT_EQ(clean_segment("Use <a href=\"x\">this<br/></a> link"), "Use this link");
}

TEST(StripHtml, TagGrammar) {
  EXPECT_EQ(strip_html("a <b title=\"x > y\">bold</b> c"), "a bold c");
  EXPECT_EQ(strip_html("x<!-- note > here -->y"), "xy");
  EXPECT_EQ(strip_html("<![CDATA[raw]]>"), "raw");
  EXPECT_EQ(strip_html("1 < 2 and 3 > 2"), "1 < 2 and 3 > 2");
  EXPECT_EQ(strip_html("open < tag"), "open < tag");
  EXPECT_EQ(strip_html("&#233;&#x41;&quot;&apos;&lt;"), "éA\"'<");
  EXPECT_EQ(strip_html("&nbsp;&foo;"), "&nbsp;&foo;");
  EXPECT_EQ(strip_html("&lt;b&gt;bold&lt;/b&gt;"), "bold");
  EXPECT_EQ(strip_html("a<br>b", " "), "a b");
}

TEST(StripHtml, IdempotentOnRandomInput) {
  std::mt19937 rng(11);
  const std::string pieces[] = {"<", ">", "b", "/", "&", "amp;", "lt;", "gt;", "\"", "!--", "--", " ", "x", "#60;", "p"};
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    const int n = static_cast<int>(rng() % 20);
    for (int k = 0; k < n; ++k) s += pieces[rng() % 15];
    const std::string once = strip_html(s);
    EXPECT_EQ(strip_html(once), once) << s;
  }
}

TEST(NormalizeWhitespace, SpecExamples) {
  EXPECT_EQ(normalize_whitespace("a  b"), "a b");
  EXPECT_EQ(normalize_whitespace("  x  "), "x");
  EXPECT_EQ(normalize_whitespace("a\t\n b"), "a b");
  EXPECT_EQ(normalize_whitespace("a  b"), "a b");
}

TEST(NormalizeWhitespace, IdempotentNoDoubleSpaces) {
  std::mt19937 rng(3);
  const std::string pieces[] = {" ", "\t", "\n", " ", "a", "é", "\r", "　"};
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    for (int k = 0, n = static_cast<int>(rng() % 16); k < n; ++k) s += pieces[rng() % 8];
    const std::string out = normalize_whitespace(s);
    EXPECT_EQ(normalize_whitespace(out), out);
    EXPECT_EQ(out.find("  "), std::string::npos);
    if (!out.empty()) {
      EXPECT_NE(out.front(), ' ');
      EXPECT_NE(out.back(), ' ');
    }
  }
}

TEST(ParseTsv, SingleRow) {
  const Corpus c = parse_tsv_text("Hello\tHallo\n", "ui-de.tsv", kEn, kDe);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].id, "ui-de:0");
  EXPECT_EQ(c[0].source, "Hello");
  EXPECT_EQ(*c[0].target(kDe), "Hallo");
  EXPECT_EQ(c[0].provenance.origin_file, "ui-de.tsv");
}

TEST(ParseTsv, EmptyFile) {
  log::Capture cap;
  EXPECT_TRUE(parse_tsv_text("", "e.tsv", kEn, kDe).empty());
  EXPECT_TRUE(cap.records().empty());
}

TEST(ParseTsv, ExtraColumnIgnoredWithWarning) {
  log::Capture cap;
  const Corpus c = parse_tsv_text("Save\tSpeichern\tnote\n", "x.tsv", kEn, kDe);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(*c[0].target(kDe), "Speichern");
  EXPECT_GE(cap.records().size(), 1u);
}

TEST(ParseTsv, ShortRowsSkippedAndLogged) {
  log::Capture cap;
  const Corpus c = parse_tsv_text("only\n\tx\nA\tB\r\n", "x.tsv", kEn, kDe);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].id, "x:2");
  EXPECT_EQ(cap.count("tsv_row_skipped"), 2u);
}

TEST(ParseTsv, CleansCells) {
  const Corpus c = parse_tsv_text("Tap  <b>Save</b>\t Tippen&amp;Speichern \n", "x.tsv", kEn, kDe);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].source, "Tap Save");
  EXPECT_EQ(*c[0].target(kDe), "Tippen&Speichern");
}

TEST(ParseTsv, InvalidUtf8NamesOffset) {
  try {
    parse_tsv_text("ok\tfine\nbad\xff\tx\n", "x.tsv", kEn, kDe);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 11u);
  }
}

TEST(ParseTsv, MissingFileIsIo) {
  EXPECT_THROW(parse_tsv("/nonexistent/a.tsv", kEn, kDe), IoError);
}

TEST(ParseTmx, OneUnit) {
  const std::string tmx = R"(<?xml version="1.0"?>
<tmx version="1.4"><header srclang="en"/><body>
<tu><tuv xml:lang="en"><seg>Save</seg></tuv><tuv xml:lang="fi"><seg>Tallenna</seg></tuv></tu>
</body></tmx>)";
  const Corpus c = parse_tmx_text(tmx, "mem.tmx");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].source, "Save");
  EXPECT_EQ(*c[0].target(kFi), "Tallenna");
}

TEST(ParseTmx, MissingSourceTuvSkipped) {
  const std::string tmx = R"(<tmx version="1.4"><header srclang="en"/><body>
<tu><tuv xml:lang="fi"><seg>Tallenna</seg></tuv></tu></body></tmx>)";
  log::Capture cap;
  EXPECT_TRUE(parse_tmx_text(tmx, "mem.tmx").empty());
  EXPECT_EQ(cap.records().size(), 1u);
}

TEST(ParseTmx, InlineMarkupFlattened) {
  const std::string tmx = R"(<tmx version="1.4"><header srclang="en-US"/><body>
<tu><tuv xml:lang="en-US"><seg>Click <bpt i="1">&lt;b&gt;</bpt>OK<ept i="1">&lt;/b&gt;</ept></seg></tuv>
<tuv xml:lang="de-DE"><seg>Klicken Sie auf OK</seg></tuv></tu></body></tmx>)";
  const Corpus c = parse_tmx_text(tmx, "mem.tmx");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].source, "Click OK");
}

TEST(ParseTmx, MalformedXmlIsParseError) {
  EXPECT_THROW(parse_tmx_text("<tmx><body><tu></body>", "bad.tmx"), ParseError);
}

TEST(ParseTmx, OutputIsSubsequenceOfInput) {
  const std::string tmx = R"(<tmx version="1.4"><header srclang="en"/><body>
<tu><tuv xml:lang="en"><seg>  A  <ph>x</ph> b </seg></tuv><tuv xml:lang="de"><seg>C&amp;D</seg></tuv></tu></body></tmx>)";
  const Corpus c = parse_tmx_text(tmx, "m.tmx");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].source, "A x b");
  EXPECT_EQ(*c[0].target(kDe), "C&D");
}
