#pragma once

#include <cctype>
#include <string>
#include <utility>
#include <vector>

#include "spanie/types.hpp"

namespace spanie {

// Whitespace + punctuation tokenizer for raw text: runs of non-space,
// non-punctuation bytes form word tokens, each ASCII punctuation byte is its
// own token. Multi-byte UTF-8 sequences are treated as word characters.
inline Document tokenize_document(std::string doc_id, const std::string& text) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.raw_text = text;
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  const auto is_punct = [](unsigned char c) { return c < 128 && std::ispunct(c) != 0; };
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    if (is_punct(c)) {
      ++i;
    } else {
      while (i < text.size()) {
        const unsigned char d = static_cast<unsigned char>(text[i]);
        if (is_space(d) || is_punct(d)) break;
        ++i;
      }
    }
    doc.tokens.push_back(text.substr(begin, i - begin));
    doc.char_offsets.emplace_back(static_cast<int>(begin), static_cast<int>(i));
  }
  validate_document(doc);
  return doc;
}

}  // namespace spanie
