#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spanie/errors.hpp"

namespace spanie {

// Inclusive token interval [start, end], 0-based.
struct Span {
  int start = 0;
  int end = 0;

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;

  int length() const { return end - start + 1; }
  bool overlaps(const Span& other) const { return start <= other.end && other.start <= end; }
};

inline std::string to_string(const Span& s) {
  return "(" + std::to_string(s.start) + "," + std::to_string(s.end) + ")";
}

struct Document {
  std::string doc_id;
  std::vector<std::string> tokens;
  // Original text plus per-token [begin, end) character offsets, when the
  // document came through the tokenizer rather than pre-tokenized input.
  std::optional<std::string> raw_text;
  std::vector<std::pair<int, int>> char_offsets;

  int size() const { return static_cast<int>(tokens.size()); }
};

inline void validate_document(const Document& doc) {
  if (doc.tokens.empty())
    throw ValidationError("document '" + doc.doc_id + "' has no tokens");
  for (const auto& t : doc.tokens)
    if (t.empty())
      throw ValidationError("document '" + doc.doc_id + "' contains an empty token");
  if (!doc.char_offsets.empty()) {
    if (!doc.raw_text.has_value())
      throw ValidationError("document '" + doc.doc_id + "': offsets without raw_text");
    if (doc.char_offsets.size() != doc.tokens.size())
      throw ValidationError("document '" + doc.doc_id + "': offset count != token count");
    int prev_end = 0;
    for (const auto& [b, e] : doc.char_offsets) {
      if (b < prev_end || e <= b || e > static_cast<int>(doc.raw_text->size()))
        throw ValidationError("document '" + doc.doc_id + "': offsets overlap or are unordered");
      prev_end = e;
    }
  }
}

struct FieldDef {
  int index = 0;
  std::string name;
  std::vector<std::string> name_tokens;
};

// The fixed, ordered set of extraction fields. Order defines field indices
// and must match between training and inference.
struct FieldSchema {
  std::vector<FieldDef> fields;

  int size() const { return static_cast<int>(fields.size()); }

  int index_of(const std::string& name) const {
    for (const auto& f : fields)
      if (f.name == name) return f.index;
    return -1;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(fields.size());
    for (const auto& f : fields) out.push_back(f.name);
    return out;
  }
};

inline void validate_schema(const FieldSchema& schema) {
  if (schema.fields.empty()) throw ValidationError("schema has no fields");
  for (int i = 0; i < schema.size(); ++i) {
    if (schema.fields[i].index != i)
      throw ValidationError("schema field '" + schema.fields[i].name + "' has index " +
                            std::to_string(schema.fields[i].index) + ", expected " +
                            std::to_string(i));
    for (int j = i + 1; j < schema.size(); ++j)
      if (schema.fields[i].name == schema.fields[j].name)
        throw ValidationError("duplicate field name '" + schema.fields[i].name + "'");
  }
}

// Builds a schema from field names; name tokens are the whitespace pieces.
inline FieldSchema make_schema(const std::vector<std::string>& names) {
  FieldSchema schema;
  for (const auto& name : names) {
    FieldDef def;
    def.index = static_cast<int>(schema.fields.size());
    def.name = name;
    std::istringstream in(name);
    std::string piece;
    while (in >> piece) def.name_tokens.push_back(piece);
    if (def.name_tokens.empty()) def.name_tokens.push_back(name);
    schema.fields.push_back(std::move(def));
  }
  validate_schema(schema);
  return schema;
}

// Gold spans for one field of one document. A field may carry zero, one, or
// many spans.
struct SpanAnnotation {
  int field_index = 0;
  std::vector<Span> spans;

  friend bool operator==(const SpanAnnotation&, const SpanAnnotation&) = default;
};

struct LabeledExample {
  Document document;
  std::vector<SpanAnnotation> annotations;  // at most one entry per field

  const SpanAnnotation* annotation_for(int field_index) const {
    for (const auto& a : annotations)
      if (a.field_index == field_index) return &a;
    return nullptr;
  }
};

// Validates one example against a schema: span ranges, per-field ordering and
// disjointness, and cross-field disjointness (the BIO tag scheme cannot
// represent a token belonging to two fields, so overlaps are rejected at
// ingest even though the per-field span heads alone could tolerate them).
inline void validate_example(const LabeledExample& ex, const FieldSchema& schema) {
  validate_document(ex.document);
  const int n = ex.document.size();
  std::vector<bool> seen(schema.size(), false);
  for (const auto& ann : ex.annotations) {
    if (ann.field_index < 0 || ann.field_index >= schema.size())
      throw ValidationError("doc '" + ex.document.doc_id + "': annotation references field index " +
                            std::to_string(ann.field_index) + " outside the schema");
    if (seen[ann.field_index])
      throw ValidationError("doc '" + ex.document.doc_id + "': duplicate annotation for field '" +
                            schema.fields[ann.field_index].name + "'");
    seen[ann.field_index] = true;
    const Span* prev = nullptr;
    for (const auto& s : ann.spans) {
      if (s.start < 0 || s.start > s.end || s.end >= n)
        throw ValidationError("doc '" + ex.document.doc_id + "', field '" +
                              schema.fields[ann.field_index].name + "': span " + to_string(s) +
                              " out of range for " + std::to_string(n) + " tokens");
      if (prev != nullptr && prev->end >= s.start)
        throw ValidationError("doc '" + ex.document.doc_id + "', field '" +
                              schema.fields[ann.field_index].name + "': spans " + to_string(*prev) +
                              " and " + to_string(s) + " overlap or are unsorted");
      prev = &s;
    }
  }
  for (std::size_t a = 0; a < ex.annotations.size(); ++a)
    for (std::size_t b = a + 1; b < ex.annotations.size(); ++b)
      for (const auto& sa : ex.annotations[a].spans)
        for (const auto& sb : ex.annotations[b].spans)
          if (sa.overlaps(sb))
            throw ValidationError(
                "doc '" + ex.document.doc_id + "': span " + to_string(sa) + " of field '" +
                schema.fields[ex.annotations[a].field_index].name + "' overlaps span " +
                to_string(sb) + " of field '" + schema.fields[ex.annotations[b].field_index].name +
                "'; cross-field overlaps cannot be encoded as BIO tags");
}

// Per-token BIO labels. Label 0 is O; field i owns labels 2i+1 (B) and
// 2i+2 (I), giving 2m+1 labels for m fields.
struct BioSequence {
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
  friend bool operator==(const BioSequence&, const BioSequence&) = default;
};

constexpr int kOutsideLabel = 0;
constexpr int bio_begin_label(int field_index) { return 2 * field_index + 1; }
constexpr int bio_inside_label(int field_index) { return 2 * field_index + 2; }
constexpr int bio_label_count(int num_fields) { return 2 * num_fields + 1; }

}  // namespace spanie
