#pragma once

#include <string_view>
#include <vector>

#include "tmforge/corpus.hpp"

namespace tmforge::curate {

struct CurationConfig {
  std::size_t max_words = 150;
  bool drop_duplicates = true;
  bool drop_source_copies = true;
  bool drop_noncontent = true;

  void validate() const;
};

/// Rules in evaluation order; the first failing rule decides the drop reason.
inline constexpr std::string_view kRuleOrder =
    "empty-after-clean,over-length,source-copy,non-content,duplicate";

/// Whitespace-delimited token count.
std::size_t word_count(std::string_view text);

/// Exact comparison after whitespace normalization. Throws ValidationError
/// when the unit has no target for `lang`.
bool is_source_copy(const TransUnit& unit, const LangTag& lang);

/// True when the text carries no natural-language content: it is code-like
/// (some token has one of `(){};=<>`, an underscore identifier or lowerCamel
/// shape, and no other token has three consecutive letters), or nothing
/// alphabetic is left after removing dates, version strings and build numbers.
bool is_noncontent(std::string_view text);

/// Token classifiers behind is_noncontent, exposed for tests.
bool is_date_token(std::string_view token);
bool is_version_token(std::string_view token);
bool is_code_token(std::string_view token);

struct CurationResult {
  Corpus corpus;
  std::vector<DropRecord> drops;
};

CurationResult curate_corpus(const Corpus& corpus, const CurationConfig& config = {});

}  // namespace tmforge::curate
