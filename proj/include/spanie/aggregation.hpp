#pragma once

#include <algorithm>
#include <vector>

#include "spanie/span_head.hpp"
#include "spanie/types.hpp"

namespace spanie {

enum class SpanSource { kSpanHead, kNerHead };

struct TaggedSpan {
  Span span;
  SpanSource source = SpanSource::kNerHead;
  friend bool operator==(const TaggedSpan&, const TaggedSpan&) = default;
};

// Final per-field extraction after merging the two heads.
struct AggregatedExtraction {
  std::vector<std::vector<TaggedSpan>> fields;

  int num_fields() const { return static_cast<int>(fields.size()); }
  friend bool operator==(const AggregatedExtraction&, const AggregatedExtraction&) = default;
};

// Span-priority merge: the span head's answer (at most one per field) always
// survives; NER spans of the same field survive only if they do not overlap
// it. Collisions are judged per field, so spans of different fields never
// suppress each other. Output is ordered by start, span-head first on ties.
inline AggregatedExtraction aggregate(const SpanPrediction& span_pred,
                                      const std::vector<SpanAnnotation>& ner_spans,
                                      int num_fields) {
  if (static_cast<int>(span_pred.fields.size()) != num_fields)
    throw ConfigError("aggregate: span prediction covers " +
                      std::to_string(span_pred.fields.size()) + " fields, expected " +
                      std::to_string(num_fields));
  AggregatedExtraction out;
  out.fields.resize(num_fields);
  for (int i = 0; i < num_fields; ++i) {
    const std::optional<Span>& chosen = span_pred.fields[i].span;
    if (chosen.has_value()) out.fields[i].push_back({*chosen, SpanSource::kSpanHead});
    for (const auto& ann : ner_spans) {
      if (ann.field_index != i) continue;
      for (const auto& s : ann.spans)
        if (!chosen.has_value() || !s.overlaps(*chosen))
          out.fields[i].push_back({s, SpanSource::kNerHead});
    }
    std::sort(out.fields[i].begin(), out.fields[i].end(), [](const TaggedSpan& a,
                                                             const TaggedSpan& b) {
      if (a.span.start != b.span.start) return a.span.start < b.span.start;
      if (a.source != b.source) return a.source == SpanSource::kSpanHead;
      return a.span.end < b.span.end;
    });
  }
  return out;
}

// Keeps only the span-head half of an aggregation; used to score the span
// head in isolation.
inline AggregatedExtraction span_head_only(const AggregatedExtraction& agg) {
  AggregatedExtraction out;
  out.fields.resize(agg.fields.size());
  for (std::size_t i = 0; i < agg.fields.size(); ++i)
    for (const auto& ts : agg.fields[i])
      if (ts.source == SpanSource::kSpanHead) out.fields[i].push_back(ts);
  return out;
}

}  // namespace spanie
