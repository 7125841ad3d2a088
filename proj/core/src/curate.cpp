#include "tmforge/curate.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "tmforge/error.hpp"
#include "tmforge/ingest.hpp"
#include "tmforge/text.hpp"

namespace tmforge::curate {

void CurationConfig::validate() const {
  if (max_words < 1) throw ValidationError("max_words must be >= 1");
}

std::size_t word_count(std::string_view text) { return text::split_whitespace(text).size(); }

bool is_source_copy(const TransUnit& unit, const LangTag& lang) {
  const std::string* target = unit.target(lang);
  if (target == nullptr) {
    throw ValidationError("unit '" + unit.id + "' has no target for " + lang.code());
  }
  return ingest::normalize_whitespace(unit.source) == ingest::normalize_whitespace(*target);
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Consumes [lo, hi] digits at `i`; returns false if fewer than lo.
bool digits(std::string_view s, std::size_t& i, std::size_t lo, std::size_t hi) {
  std::size_t n = 0;
  while (i < s.size() && n < hi && is_digit(s[i])) {
    ++i;
    ++n;
  }
  return n >= lo;
}

bool any_of_chars(std::string_view s, std::string_view set) {
  return s.find_first_of(set) != std::string_view::npos;
}

// Punctuation that commonly wraps a token in running text.
constexpr std::string_view kWrapping = "()[]\"'.,;:!?";

std::string_view unwrap(std::string_view tok) {
  while (!tok.empty() && kWrapping.find(tok.front()) != std::string_view::npos) tok.remove_prefix(1);
  while (!tok.empty() && kWrapping.find(tok.back()) != std::string_view::npos) tok.remove_suffix(1);
  return tok;
}

bool has_letter(std::string_view tok) {
  for (char32_t cp : text::decode_utf8(tok)) {
    if (text::is_alpha(cp)) return true;
  }
  return false;
}

std::size_t longest_letter_run(std::string_view tok) {
  std::size_t best = 0;
  std::size_t run = 0;
  for (char32_t cp : text::decode_utf8(tok)) {
    run = text::is_alpha(cp) ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

bool is_ascii_word(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

constexpr std::array<std::string_view, 12> kMonths = {
    "january", "february", "march", "april", "may", "june",
    "july", "august", "september", "october", "november", "december"};

bool is_month_name(std::string_view tok) {
  tok = unwrap(tok);
  if (tok.size() < 3) return false;
  std::string lower;
  for (char c : tok) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (std::string_view m : kMonths) {
    if (lower == m || (lower.size() == 3 && m.substr(0, 3) == lower) || (lower == "sept")) return true;
  }
  return false;
}

// 1-2 digit day (optionally 1st/2nd/3rd/4th...) or 4-digit year.
bool is_day_or_year(std::string_view tok) {
  tok = unwrap(tok);
  std::size_t i = 0;
  if (!digits(tok, i, 1, 4)) return false;
  if (i == tok.size()) return i <= 2 || i == 4;
  if (i > 2) return false;
  const std::string_view suffix = tok.substr(i);
  return suffix == "st" || suffix == "nd" || suffix == "rd" || suffix == "th";
}

bool is_build_word(std::string_view tok) {
  tok = unwrap(tok);
  return tok == "build" || tok == "Build" || tok == "BUILD";
}

bool is_number_token(std::string_view tok) {
  tok = unwrap(tok);
  if (!tok.empty() && tok.front() == '#') tok.remove_prefix(1);
  std::size_t i = 0;
  return digits(tok, i, 1, 64) && i == tok.size();
}

}  // namespace

bool is_date_token(std::string_view token) {
  const std::string_view t = unwrap(token);
  std::size_t i = 0;
  // YYYY-MM-DD, YYYY/MM/DD, YYYY.MM.DD (optional THH:MM[:SS][Z])
  if (digits(t, i, 4, 4) && i < t.size() && (t[i] == '-' || t[i] == '/' || t[i] == '.')) {
    const char sep = t[i++];
    if (digits(t, i, 1, 2) && i < t.size() && t[i] == sep) {
      ++i;
      if (digits(t, i, 1, 2)) {
        if (i == t.size()) return true;
        if (t[i] == 'T' || t[i] == 't') {
          ++i;
          if (digits(t, i, 2, 2) && i < t.size() && t[i] == ':' && (++i, digits(t, i, 2, 2))) {
            if (i < t.size() && t[i] == ':') {
              ++i;
              if (!digits(t, i, 2, 2)) return false;
            }
            if (i < t.size() && (t[i] == 'Z' || t[i] == 'z')) ++i;
            return i == t.size();
          }
        }
      }
    }
    return false;
  }
  // DD/MM/YYYY, MM-DD-YY, DD.MM.YYYY
  i = 0;
  if (digits(t, i, 1, 2) && i < t.size() && (t[i] == '/' || t[i] == '-' || t[i] == '.')) {
    const char sep = t[i++];
    if (digits(t, i, 1, 2) && i < t.size() && t[i] == sep) {
      ++i;
      const std::size_t start = i;
      if (digits(t, i, 2, 4) && i == t.size() && (i - start == 2 || i - start == 4)) return true;
    }
    return false;
  }
  // HH:MM[:SS]
  i = 0;
  if (digits(t, i, 1, 2) && i < t.size() && t[i] == ':') {
    ++i;
    if (!digits(t, i, 2, 2)) return false;
    if (i < t.size() && t[i] == ':') {
      ++i;
      if (!digits(t, i, 2, 2)) return false;
    }
    return i == t.size();
  }
  return false;
}

bool is_version_token(std::string_view token) {
  const std::string_view t = unwrap(token);
  std::size_t i = 0;
  if (i < t.size() && (t[i] == 'v' || t[i] == 'V')) ++i;
  if (!digits(t, i, 1, 16)) return false;
  std::size_t parts = 1;
  while (i < t.size() && t[i] == '.') {
    ++i;
    if (!digits(t, i, 1, 16)) return false;
    ++parts;
  }
  if (parts < 2) return false;
  if (i == t.size()) return true;
  // Pre-release / build metadata suffix: 1.2.3-beta, 2.0+build5
  if (t[i] != '-' && t[i] != '+') return false;
  ++i;
  if (i == t.size()) return false;
  return std::all_of(t.begin() + static_cast<std::ptrdiff_t>(i), t.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
  });
}

bool is_code_token(std::string_view token) {
  const std::string_view t = unwrap(token);
  if (t.empty()) return false;
  if (any_of_chars(token, "{};=<>") || any_of_chars(t, "()")) return true;
  // Call syntax such as foo() or f(x): an opening parenthesis glued to a name.
  for (std::size_t i = 1; i < token.size(); ++i) {
    if (token[i] == '(' && std::isalnum(static_cast<unsigned char>(token[i - 1]))) return true;
  }
  if (!is_ascii_word(t)) return false;
  const bool letter = std::any_of(t.begin(), t.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
  if (t.find('_') != std::string_view::npos && letter) return true;
  // lowerCamel with at least two leading lowercase letters: getValue, onClick
  std::size_t lead = 0;
  while (lead < t.size() && t[lead] >= 'a' && t[lead] <= 'z') ++lead;
  return lead >= 2 && lead < t.size() && t[lead] >= 'A' && t[lead] <= 'Z';
}

bool is_noncontent(std::string_view text) {
  const auto tokens = text::split_whitespace(text);
  if (tokens.empty()) return true;

  bool any_code = false;
  bool natural_word = false;
  for (std::string_view tok : tokens) {
    if (is_code_token(tok)) {
      any_code = true;
    } else if (longest_letter_run(tok) >= 3) {
      natural_word = true;
    }
  }
  if (any_code && !natural_word) return true;

  std::vector<bool> removed(tokens.size(), false);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string_view tok = tokens[i];
    if (is_date_token(tok) || is_version_token(tok)) {
      removed[i] = true;
    } else if (is_month_name(tok)) {
      const bool prev = i > 0 && is_day_or_year(tokens[i - 1]);
      const bool next = i + 1 < tokens.size() && is_day_or_year(tokens[i + 1]);
      if (prev || next) removed[i] = true;
    } else if (is_build_word(tok) && i + 1 < tokens.size() && is_number_token(tokens[i + 1])) {
      removed[i] = removed[i + 1] = true;
    }
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!removed[i] && has_letter(tokens[i])) return false;
  }
  return true;
}

CurationResult curate_corpus(const Corpus& corpus, const CurationConfig& config) {
  config.validate();
  CurationResult result;
  std::unordered_set<std::string> seen;
  seen.reserve(corpus.size());

  auto drop = [&](const TransUnit& u, DropRule rule, std::string detail) {
    result.drops.push_back({u.id, rule, std::move(detail)});
  };

  for (const auto& u : corpus.units()) {
    if (text::strip(u.source).empty()) {
      drop(u, DropRule::kEmptyAfterClean, "empty source");
      continue;
    }
    if (u.targets.empty()) {
      drop(u, DropRule::kEmptyAfterClean, "no targets");
      continue;
    }
    if (const auto it = std::find_if(u.targets.begin(), u.targets.end(),
                                     [](const auto& kv) { return text::strip(kv.second).empty(); });
        it != u.targets.end()) {
      drop(u, DropRule::kEmptyAfterClean, "empty target " + it->first.code());
      continue;
    }

    if (const std::size_t n = word_count(u.source); n > config.max_words) {
      drop(u, DropRule::kOverLength, "source has " + std::to_string(n) + " words");
      continue;
    }
    bool over = false;
    for (const auto& [lang, t] : u.targets) {
      if (const std::size_t n = word_count(t); n > config.max_words) {
        drop(u, DropRule::kOverLength, "target " + lang.code() + " has " + std::to_string(n) + " words");
        over = true;
        break;
      }
    }
    if (over) continue;

    if (config.drop_source_copies) {
      bool copy = false;
      for (const auto& [lang, _] : u.targets) {
        if (is_source_copy(u, lang)) {
          drop(u, DropRule::kSourceCopy, "target " + lang.code() + " equals source");
          copy = true;
          break;
        }
      }
      if (copy) continue;
    }

    if (config.drop_noncontent && is_noncontent(u.source)) {
      drop(u, DropRule::kNonContent, "source has no natural-language content");
      continue;
    }

    if (config.drop_duplicates) {
      // Length-prefixed so that field boundaries cannot alias.
      std::string key;
      auto add = [&key](std::string_view s) {
        key += std::to_string(s.size());
        key.push_back(':');
        key.append(s);
      };
      add(u.source);
      for (const auto& [lang, t] : u.targets) {
        add(lang.code());
        add(t);
      }
      if (!seen.insert(std::move(key)).second) {
        drop(u, DropRule::kDuplicate, "repeats an earlier unit");
        continue;
      }
    }

    result.corpus.push_back(u);
  }
  result.corpus.metadata = corpus.metadata;
  result.corpus.metadata["curation.rule_order"] = std::string(kRuleOrder);
  result.corpus.metadata["curation.word_count"] = "whitespace";
  return result;
}

}  // namespace tmforge::curate
