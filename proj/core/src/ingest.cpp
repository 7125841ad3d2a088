#include "tmforge/ingest.hpp"

#include <cstdint>

#include "tmforge/error.hpp"
#include "tmforge/log.hpp"
#include "tmforge/text.hpp"
#include "xml_reader.hpp"

namespace tmforge::ingest {
namespace {

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// End (one past '>') of a tag starting at `start`, or npos if it does not close.
std::size_t tag_end(std::string_view s, std::size_t start) {
  char quote = 0;
  for (std::size_t i = start + 1; i < s.size(); ++i) {
    const char c = s[i];
    if (quote != 0) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      return i + 1;
    }
  }
  // Unbalanced quote: fall back to the first '>'.
  const std::size_t gt = s.find('>', start + 1);
  return gt == std::string_view::npos ? gt : gt + 1;
}

std::string remove_tags(std::string_view s, std::string_view replacement) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c != '<' || i + 1 >= s.size()) {
      out.push_back(c);
      ++i;
      continue;
    }
    const std::string_view rest = s.substr(i);
    if (rest.substr(0, 4) == "<!--") {
      const std::size_t end = s.find("-->", i + 4);
      if (end != std::string_view::npos) {
        out.append(replacement);
        i = end + 3;
        continue;
      }
    } else if (rest.substr(0, 9) == "<![CDATA[") {
      const std::size_t end = s.find("]]>", i + 9);
      if (end != std::string_view::npos) {
        out.append(s.substr(i + 9, end - i - 9));
        i = end + 3;
        continue;
      }
    } else {
      const char n = s[i + 1];
      const bool opens = is_letter(n) || n == '!' || n == '?' ||
                         (n == '/' && i + 2 < s.size() && is_letter(s[i + 2]));
      if (opens) {
        const std::size_t end = tag_end(s, i);
        if (end != std::string_view::npos) {
          out.append(replacement);
          i = end;
          continue;
        }
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view ref = s.substr(i + 1, semi - i - 1);
    bool decoded = true;
    if (ref == "amp") out.push_back('&');
    else if (ref == "lt") out.push_back('<');
    else if (ref == "gt") out.push_back('>');
    else if (ref == "quot") out.push_back('"');
    else if (ref == "apos") out.push_back('\'');
    else if (ref.size() >= 2 && ref[0] == '#') {
      const bool hex = ref[1] == 'x' || ref[1] == 'X';
      const std::string_view digits = ref.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      decoded = !digits.empty();
      for (char c : digits) {
        int v = -1;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        if (v < 0 || cp > 0x10FFFF) {
          decoded = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
      }
      if (decoded && (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) decoded = false;
      if (decoded) text::append_utf8(out, cp);
    } else {
      decoded = false;
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

}  // namespace

std::string strip_html(std::string_view text, std::string_view tag_replacement) {
  std::string current(text);
  while (true) {
    std::string next = decode_entities(remove_tags(current, tag_replacement));
    if (next == current) return next;
    current = std::move(next);
  }
}

std::string strip_html(std::string_view text) { return strip_html(text, {}); }

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::string_view tok : text::split_whitespace(text)) {
    if (!out.empty()) out.push_back(' ');
    out.append(tok);
  }
  return out;
}

std::string clean_segment(std::string_view text) { return normalize_whitespace(strip_html(text)); }

std::string make_unit_id(std::string_view origin, std::size_t row) {
  return std::filesystem::path(origin).stem().string() + ":" + std::to_string(row);
}

// --- TSV --------------------------------------------------------------------

Corpus parse_tsv_text(std::string_view data, std::string_view origin, const LangTag& source_lang,
                      const LangTag& target_lang, const Options& options) {
  const std::size_t bom = data.size() - text::strip_bom(data).size();
  if (const std::size_t bad = text::find_invalid_utf8(data); bad != std::string_view::npos) {
    throw ParseError(std::string(origin) + ": malformed UTF-8 at byte offset " + std::to_string(bad), bad);
  }
  data.remove_prefix(bom);

  Corpus corpus;
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t nl = data.find('\n', pos);
    std::string_view line = data.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? data.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t this_row = row++;
    if (text::strip(line).empty()) continue;

    RawRow raw{{}, std::string(origin), this_row};
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      raw.columns.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }

    const bool has_source = !text::strip(raw.columns[0]).empty();
    const bool has_target = raw.columns.size() >= 2 && !text::strip(raw.columns[1]).empty();
    if (!has_source || !has_target) {
      log::warn("tsv_row_skipped", {{"file", raw.origin_file},
                                    {"row", std::to_string(raw.row)},
                                    {"reason", "fewer than 2 non-empty columns"}});
      continue;
    }
    if (raw.columns.size() > 2) {
      log::warn("tsv_extra_columns", {{"file", raw.origin_file},
                                      {"row", std::to_string(raw.row)},
                                      {"columns", std::to_string(raw.columns.size())}});
    }

    TransUnit u;
    u.id = make_unit_id(origin, raw.row);
    u.source = clean_segment(raw.columns[0]);
    u.source_lang = source_lang;
    u.targets.emplace(target_lang, clean_segment(raw.columns[1]));
    u.provenance = {raw.origin_file, options.domain};
    corpus.push_back(std::move(u));
  }
  return corpus;
}

Corpus parse_tsv(const std::filesystem::path& path, const LangTag& source_lang,
                 const LangTag& target_lang, const Options& options) {
  return parse_tsv_text(read_file(path), path.string(), source_lang, target_lang, options);
}

// --- TMX --------------------------------------------------------------------

namespace {

const std::string* tuv_lang(const xml::Node& tuv) {
  if (const auto* l = tuv.attribute("xml:lang")) return l;
  return tuv.attribute("lang");  // TMX 1.1
}

const xml::Node* find_child(const xml::Node& n, std::string_view name) {
  for (const auto& c : n.children) {
    if (c.is_element(name)) return &c;
  }
  return nullptr;
}

}  // namespace

Corpus parse_tmx_text(std::string_view data, std::string_view origin, const Options& options) {
  data = text::strip_bom(data);
  if (const std::size_t bad = text::find_invalid_utf8(data); bad != std::string_view::npos) {
    throw ParseError(std::string(origin) + ": malformed UTF-8 at byte offset " + std::to_string(bad), bad);
  }
  xml::Node root;
  try {
    root = xml::parse_document(data);
  } catch (const ParseError& e) {
    throw ParseError(std::string(origin) + ": " + e.what(), e.offset());
  }
  if (!root.is_element("tmx")) throw ParseError(std::string(origin) + ": root element is not <tmx>", root.offset);

  std::string header_srclang;
  if (const auto* header = find_child(root, "header")) {
    if (const auto* s = header->attribute("srclang")) header_srclang = *s;
  }
  const auto* body = find_child(root, "body");
  if (body == nullptr) throw ParseError(std::string(origin) + ": missing <body>", root.offset);

  Corpus corpus;
  std::size_t tu_index = 0;
  for (const auto& tu : body->children) {
    if (!tu.is_element("tu")) continue;
    const std::size_t index = tu_index++;
    const std::string id = make_unit_id(origin, index);

    std::string srclang = header_srclang;
    if (const auto* s = tu.attribute("srclang")) srclang = *s;
    if (srclang.empty() || srclang == "*all*") {
      log::warn("tmx_tu_skipped", {{"file", std::string(origin)}, {"tu", std::to_string(index)},
                                   {"reason", "no declared source language"}});
      continue;
    }
    LangTag src;
    try {
      src = LangTag::parse(srclang);
    } catch (const ValidationError&) {
      throw ParseError(std::string(origin) + ": bad srclang '" + srclang + "'", tu.offset);
    }

    struct Variant {
      LangTag lang;
      std::string text;
    };
    std::vector<Variant> variants;
    for (const auto& tuv : tu.children) {
      if (!tuv.is_element("tuv")) continue;
      const auto* lang = tuv_lang(tuv);
      const auto* seg = find_child(tuv, "seg");
      if (lang == nullptr || seg == nullptr) continue;
      LangTag tag;
      try {
        tag = LangTag::parse(*lang);
      } catch (const ValidationError&) {
        throw ParseError(std::string(origin) + ": bad xml:lang '" + *lang + "'", tuv.offset);
      }
      variants.push_back({tag, clean_segment(seg->text_content())});
    }

    // Exact tag first, then a unique primary-subtag match (en vs en-US).
    std::ptrdiff_t source_idx = -1;
    for (std::size_t i = 0; i < variants.size() && source_idx < 0; ++i) {
      if (variants[i].lang == src) source_idx = static_cast<std::ptrdiff_t>(i);
    }
    if (source_idx < 0) {
      for (std::size_t i = 0; i < variants.size(); ++i) {
        if (variants[i].lang.primary() == src.primary()) {
          if (source_idx >= 0) {
            source_idx = -1;
            break;
          }
          source_idx = static_cast<std::ptrdiff_t>(i);
        }
      }
    }
    if (source_idx < 0) {
      log::warn("tmx_tu_skipped", {{"file", std::string(origin)}, {"tu", std::to_string(index)},
                                   {"reason", "no <tuv> in source language " + src.code()}});
      continue;
    }

    TransUnit u;
    u.id = id;
    u.source = variants[static_cast<std::size_t>(source_idx)].text;
    u.source_lang = src;
    for (std::size_t i = 0; i < variants.size(); ++i) {
      if (static_cast<std::ptrdiff_t>(i) == source_idx) continue;
      if (!u.targets.emplace(variants[i].lang, variants[i].text).second) {
        log::warn("tmx_duplicate_tuv", {{"file", std::string(origin)}, {"tu", std::to_string(index)},
                                        {"lang", variants[i].lang.code()}});
      }
    }
    u.provenance = {std::string(origin), options.domain};
    corpus.push_back(std::move(u));
  }
  return corpus;
}

Corpus parse_tmx(const std::filesystem::path& path, const Options& options) {
  return parse_tmx_text(read_file(path), path.string(), options);
}

}  // namespace tmforge::ingest
