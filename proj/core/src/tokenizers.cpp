#include <algorithm>

#include "tmforge/metrics.hpp"
#include "tmforge/text.hpp"

namespace tmforge::metrics {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// [\{-\~\[-\` -\&\(-\+\:-\@\/]
bool is_13a_symbol(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= '{' && u <= '~') || (u >= '[' && u <= '`') || (u >= ' ' && u <= '&') || (u >= '(' && u <= '+') ||
         (u >= ':' && u <= '@') || u == '/';
}

// Python's re.sub with a two-character pattern "(A)(B)" -> "<pre>\1<mid>\2<post>",
// scanning left to right without overlap. Byte-wise matching is exact here
// because every class either is ASCII or excludes only ASCII digits.
template <typename First, typename Second>
std::string sub_pair(const std::string& s, First first, Second second, std::string_view pre, std::string_view mid,
                     std::string_view post) {
  std::string out;
  out.reserve(s.size() + s.size() / 4);
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && first(s[i]) && second(s[i + 1])) {
      out.append(pre);
      out.push_back(s[i]);
      out.append(mid);
      out.push_back(s[i + 1]);
      out.append(post);
      i += 2;
    } else {
      out.push_back(s[i]);
      ++i;
    }
  }
  return out;
}

std::string pad_symbols(const std::string& s, bool (*is_symbol)(char)) {
  std::string out;
  out.reserve(s.size() * 2);
  for (char c : s) {
    if (is_symbol(c)) {
      out.push_back(' ');
      out.push_back(c);
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string join_split(std::string_view s) {
  std::string out;
  for (std::string_view tok : text::split_whitespace(s)) {
    if (!out.empty()) out.push_back(' ');
    out.append(tok);
  }
  return out;
}

std::string number_punct_rules(std::string line) {
  auto not_digit = [](char c) { return !is_digit(c); };
  auto period_comma = [](char c) { return c == '.' || c == ','; };
  line = sub_pair(line, not_digit, period_comma, "", " ", " ");
  line = sub_pair(line, period_comma, not_digit, " ", " ", "");
  line = sub_pair(line, [](char c) { return is_digit(c); }, [](char c) { return c == '-'; }, "", " ", " ");
  return line;
}

}  // namespace

std::string tokenize_13a_line(std::string_view input) {
  std::string line = text::replace_all(input, "<skipped>", "");
  line = text::replace_all(line, "-\n", "");
  std::replace(line.begin(), line.end(), '\n', ' ');
  if (line.find('&') != std::string::npos) {
    line = text::replace_all(line, "&quot;", "\"");
    line = text::replace_all(line, "&amp;", "&");
    line = text::replace_all(line, "&lt;", "<");
    line = text::replace_all(line, "&gt;", ">");
  }
  line = " " + line + " ";
  line = pad_symbols(line, is_13a_symbol);
  return join_split(number_punct_rules(std::move(line)));
}

std::vector<std::string> tokenize_13a(std::string_view text) {
  const std::string line = tokenize_13a_line(text);
  std::vector<std::string> out;
  for (std::string_view tok : text::split_whitespace(line)) out.emplace_back(tok);
  return out;
}

namespace {

// [{-~[-` -&(-+:-@/] as used by the tercom normalizer.
bool is_tercom_symbol(char c) { return is_13a_symbol(c); }

std::string tercom_normalize(std::string_view input) {
  std::string s = text::replace_all(input, "\n-", "");
  std::replace(s.begin(), s.end(), '\n', ' ');
  s = text::replace_all(s, "&quot;", "\"");
  s = text::replace_all(s, "&amp;", "&");
  s = text::replace_all(s, "&lt;", "<");
  s = text::replace_all(s, "&gt;", ">");
  s = " " + s + " ";
  s = pad_symbols(s, is_tercom_symbol);
  s = text::replace_all(s, "'s ", " 's ");
  return number_punct_rules(std::move(s));
}

std::string remove_punct(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::string_view(".,?:;!\"()").find(c) == std::string_view::npos) out.push_back(c);
  }
  return out;
}

}  // namespace

std::string tokenize_tercom(std::string_view input, const TerConfig& config) {
  if (input.empty()) return {};
  std::string s = config.case_insensitive ? text::to_lower(input) : std::string(input);
  if (config.normalized) s = tercom_normalize(s);
  if (config.no_punct) s = remove_punct(s);
  return join_split(s);
}

std::vector<std::string> chrf_words(std::string_view input) {
  static constexpr std::string_view kPuncts = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";
  auto is_punct = [](char32_t c) { return c < 128 && kPuncts.find(static_cast<char>(c)) != std::string_view::npos; };
  std::vector<std::string> out;
  for (std::string_view w : text::split_whitespace(input)) {
    const std::u32string cps = text::decode_utf8(w);
    if (cps.size() == 1) {
      out.emplace_back(w);
    } else if (is_punct(cps.back())) {
      out.emplace_back(w.substr(0, w.size() - 1));
      out.emplace_back(w.substr(w.size() - 1));
    } else if (is_punct(cps.front())) {
      out.emplace_back(w.substr(0, 1));
      out.emplace_back(w.substr(1));
    } else {
      out.emplace_back(w);
    }
  }
  return out;
}

}  // namespace tmforge::metrics
