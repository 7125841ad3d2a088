#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tmforge/corpus.hpp"

namespace tmforge::ingest {

/// Removes markup and decodes character references.
///
/// Tags are recognised by a single left-to-right scan: `<` must be followed by
/// a letter, `/`, `!` or `?`; quoted attribute values may contain `>`;
/// comments `<!-- -->` are removed whole; CDATA markers are removed and their
/// content kept. A `<` that never closes is left as is. Afterwards the five
/// XML entities and numeric references are decoded; unknown named entities
/// stay verbatim. The two steps repeat until the text is stable, so escaped
/// markup (`&lt;b&gt;`) is removed as well and the function is idempotent.
std::string strip_html(std::string_view text);

/// Same as strip_html but every removed tag is replaced by `tag_replacement`.
std::string strip_html(std::string_view text, std::string_view tag_replacement);

/// Collapses every run of Unicode whitespace to one ASCII space and trims.
std::string normalize_whitespace(std::string_view text);

/// strip_html followed by normalize_whitespace.
std::string clean_segment(std::string_view text);

struct RawRow {
  std::vector<std::string> columns;
  std::string origin_file;
  std::size_t row = 0;  // 0-based line index in the file
};

struct Options {
  Domain domain = Domain::kOther;
};

/// Tab-separated bilingual export: column 1 is the source, column 2 the
/// `target_lang` translation, further columns are ignored with a warning.
/// Rows with fewer than two non-empty cells are skipped and logged.
Corpus parse_tsv(const std::filesystem::path& path, const LangTag& source_lang,
                 const LangTag& target_lang, const Options& options = {});
Corpus parse_tsv_text(std::string_view data, std::string_view origin, const LangTag& source_lang,
                      const LangTag& target_lang, const Options& options = {});

/// TMX 1.4: one unit per <tu>. The <tuv> in the declared source language
/// (tu/@srclang, else header/@srclang) becomes the source; all other <tuv>s
/// become targets. Inline markup inside <seg> is flattened to its text.
Corpus parse_tmx(const std::filesystem::path& path, const Options& options = {});
Corpus parse_tmx_text(std::string_view data, std::string_view origin, const Options& options = {});

/// `stem:row` identifier used for ingested units.
std::string make_unit_id(std::string_view origin, std::size_t row);

}  // namespace tmforge::ingest
