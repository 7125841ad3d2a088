#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tmforge::xml {

// Minimal DOM for well-formed XML documents: elements, attributes, character
// data (entities and CDATA resolved). Comments, processing instructions and
// the DOCTYPE declaration are skipped.
struct Node {
  enum class Kind { kElement, kText };

  Kind kind = Kind::kElement;
  std::string name;  // element name, or the text for kText nodes
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Node> children;
  std::size_t offset = 0;  // byte offset of the start tag

  bool is_element(std::string_view n) const { return kind == Kind::kElement && name == n; }
  const std::string* attribute(std::string_view key) const;
  /// Concatenated character data of this node and all descendants.
  std::string text_content() const;
};

/// Throws ParseError with a "line L, column C" location on malformed input.
Node parse_document(std::string_view xml);

}  // namespace tmforge::xml
