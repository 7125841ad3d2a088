#include "xml_reader.hpp"

#include <cstdint>

#include "tmforge/error.hpp"
#include "tmforge/text.hpp"

namespace tmforge::xml {

const std::string* Node::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

namespace {

void append_text(const Node& n, std::string& out) {
  if (n.kind == Node::Kind::kText) {
    out += n.name;
    return;
  }
  for (const auto& c : n.children) append_text(c, out);
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Node document() {
    skip_misc();
    if (!at('<') || peek(1) == '/' || peek(1) == '!' || peek(1) == '?') fail("expected root element");
    Node root = element();
    skip_misc();
    if (pos_ != src_.size()) fail("content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }

  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("XML parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + msg,
                     at);
  }

  bool at(char c) const { return pos_ < src_.size() && src_[pos_] == c; }
  char peek(std::size_t k) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }
  bool starts(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  static bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
  static bool is_name_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9') ||
           c == '_' || c == ':' || c == '-' || c == '.';
  }

  void skip_ws() {
    while (pos_ < src_.size() && is_ws(src_[pos_])) ++pos_;
  }

  void skip_until(std::string_view terminator, const char* what) {
    const std::size_t end = src_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(std::string("unterminated ") + what);
    pos_ = end + terminator.size();
  }

  void skip_doctype() {
    pos_ += 9;  // "<!DOCTYPE"
    int depth = 0;
    while (pos_ < src_.size()) {
      const char c = src_[pos_++];
      if (c == '[') ++depth;
      else if (c == ']') --depth;
      else if (c == '>' && depth <= 0) return;
    }
    fail("unterminated DOCTYPE");
  }

  void skip_misc() {
    while (true) {
      skip_ws();
      if (starts("<?")) skip_until("?>", "processing instruction");
      else if (starts("<!--")) skip_until("-->", "comment");
      else if (starts("<!DOCTYPE")) skip_doctype();
      else return;
    }
  }

  std::string name() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a name");
    return std::string(src_.substr(start, pos_ - start));
  }

  // Decodes an entity reference starting at '&'; appends the result.
  void entity(std::string& out) {
    const std::size_t start = pos_;
    const std::size_t semi = src_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 12) fail("unterminated entity reference");
    const std::string_view ref = src_.substr(pos_ + 1, semi - pos_ - 1);
    pos_ = semi + 1;
    if (ref == "lt") out += '<';
    else if (ref == "gt") out += '>';
    else if (ref == "amp") out += '&';
    else if (ref == "quot") out += '"';
    else if (ref == "apos") out += '\'';
    else if (!ref.empty() && ref[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
      const std::string_view digits = ref.substr(hex ? 2 : 1);
      if (digits.empty()) fail_at("bad character reference", start);
      for (char c : digits) {
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else fail_at("bad character reference", start);
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        if (cp > 0x10FFFF) fail_at("character reference out of range", start);
      }
      if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) fail_at("invalid character reference", start);
      text::append_utf8(out, cp);
    } else {
      // Undeclared entity: keep the reference verbatim rather than reject the file.
      out.append(src_.substr(start, pos_ - start));
    }
  }

  std::string attribute_value() {
    const char quote = src_[pos_];
    if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) fail("unterminated attribute value");
      const char c = src_[pos_];
      if (c == quote) {
        ++pos_;
        return out;
      }
      if (c == '<') fail("'<' in attribute value");
      if (c == '&') entity(out);
      else {
        out.push_back(c);
        ++pos_;
      }
    }
  }

  Node element() {
    Node node;
    node.offset = pos_;
    ++pos_;  // '<'
    node.name = name();
    while (true) {
      skip_ws();
      if (pos_ >= src_.size()) fail("unterminated start tag <" + node.name + ">");
      if (starts("/>")) {
        pos_ += 2;
        return node;
      }
      if (at('>')) {
        ++pos_;
        break;
      }
      std::string key = name();
      skip_ws();
      if (!at('=')) fail("expected '=' after attribute name");
      ++pos_;
      skip_ws();
      node.attributes.emplace_back(std::move(key), attribute_value());
    }
    content(node);
    return node;
  }

  void flush_text(Node& parent, std::string& buf) {
    if (buf.empty()) return;
    Node t;
    t.kind = Node::Kind::kText;
    t.name = std::move(buf);
    buf.clear();
    parent.children.push_back(std::move(t));
  }

  void content(Node& parent) {
    std::string buf;
    while (true) {
      if (pos_ >= src_.size()) fail_at("unclosed element <" + parent.name + ">", parent.offset);
      const char c = src_[pos_];
      if (c == '<') {
        if (starts("</")) {
          flush_text(parent, buf);
          pos_ += 2;
          const std::size_t at_name = pos_;
          const std::string closing = name();
          if (closing != parent.name) {
            fail_at("mismatched closing tag </" + closing + "> for <" + parent.name + ">", at_name);
          }
          skip_ws();
          if (!at('>')) fail("expected '>'");
          ++pos_;
          return;
        }
        if (starts("<!--")) {
          skip_until("-->", "comment");
        } else if (starts("<![CDATA[")) {
          const std::size_t end = src_.find("]]>", pos_);
          if (end == std::string_view::npos) fail("unterminated CDATA section");
          buf.append(src_.substr(pos_ + 9, end - pos_ - 9));
          pos_ = end + 3;
        } else if (starts("<?")) {
          skip_until("?>", "processing instruction");
        } else {
          flush_text(parent, buf);
          parent.children.push_back(element());
        }
      } else if (c == '&') {
        entity(buf);
      } else {
        buf.push_back(c);
        ++pos_;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string Node::text_content() const {
  std::string out;
  append_text(*this, out);
  return out;
}

Node parse_document(std::string_view xml) {
  return Parser(xml).document();
}

}  // namespace tmforge::xml
