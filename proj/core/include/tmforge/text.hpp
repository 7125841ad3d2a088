#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by every module. Whitespace and case rules follow
// Python's str semantics so that tokenization agrees with reference scorers.
namespace tmforge::text {

/// Decodes UTF-8 into scalar values. Throws ParseError naming the byte offset
/// of the first invalid sequence (overlong forms and surrogates are invalid).
std::u32string decode_utf8(std::string_view s);

/// Returns the byte offset of the first invalid sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s);

std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

/// Number of scalar values; input must be valid UTF-8.
std::size_t length(std::string_view s);

/// Same code points as Python's str.isspace().
bool is_space(char32_t cp);

/// Splits on runs of Unicode whitespace, like Python's str.split().
std::vector<std::string_view> split_whitespace(std::string_view s);

/// Strips Unicode whitespace from the right / both ends.
std::string_view rstrip(std::string_view s);
std::string_view strip(std::string_view s);

/// Full-string lowercase with Python str.lower() results for the scripts
/// handled by the C.UTF-8 locale tables (plus the U+0130 special case).
std::string to_lower(std::string_view s);

/// Unicode letter test (locale tables).
bool is_alpha(char32_t cp);

/// Removes a leading UTF-8 byte-order mark, if present.
std::string_view strip_bom(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

/// Replaces every occurrence of `from` (non-empty) with `to`.
std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

}  // namespace tmforge::text
