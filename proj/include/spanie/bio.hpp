#pragma once

#include <string>
#include <vector>

#include "spanie/types.hpp"

namespace spanie {

// Encodes annotations into a BIO label sequence of length n. Spans must be
// disjoint across all fields; a collision throws with both offenders named.
inline BioSequence bio_encode(const std::vector<SpanAnnotation>& annotations, int n,
                              int num_fields) {
  BioSequence out;
  out.labels.assign(static_cast<std::size_t>(n), kOutsideLabel);
  // owner[t] remembers which (field, span) claimed token t, for error text.
  std::vector<std::pair<int, Span>> owner(static_cast<std::size_t>(n), {-1, Span{}});
  for (const auto& ann : annotations) {
    if (ann.field_index < 0 || ann.field_index >= num_fields)
      throw ValidationError("bio_encode: field index " + std::to_string(ann.field_index) +
                            " outside [0," + std::to_string(num_fields) + ")");
    for (const auto& s : ann.spans) {
      if (s.start < 0 || s.start > s.end || s.end >= n)
        throw ValidationError("bio_encode: span " + to_string(s) + " out of range for n=" +
                              std::to_string(n));
      for (int t = s.start; t <= s.end; ++t) {
        if (out.labels[t] != kOutsideLabel)
          throw ValidationError("bio_encode: span " + to_string(s) + " of field " +
                                std::to_string(ann.field_index) + " collides with span " +
                                to_string(owner[t].second) + " of field " +
                                std::to_string(owner[t].first) + " at token " + std::to_string(t));
        out.labels[t] = t == s.start ? bio_begin_label(ann.field_index)
                                     : bio_inside_label(ann.field_index);
        owner[t] = {ann.field_index, s};
      }
    }
  }
  return out;
}

// Decodes a label sequence into per-field span lists. Never rejects: an
// orphan I (no preceding B/I of the same field) starts a new entity at that
// token, so raw argmax outputs always decode.
inline std::vector<SpanAnnotation> bio_decode(const BioSequence& seq, int num_fields) {
  const int n = seq.size();
  std::vector<std::vector<Span>> per_field(static_cast<std::size_t>(num_fields));
  int open_field = -1;  // field of the entity currently being extended
  for (int t = 0; t < n; ++t) {
    const int label = seq.labels[t];
    if (label < 0 || label >= bio_label_count(num_fields))
      throw ValidationError("bio_decode: label " + std::to_string(label) + " out of range");
    if (label == kOutsideLabel) {
      open_field = -1;
      continue;
    }
    const int field = (label - 1) / 2;
    const bool is_begin = label == bio_begin_label(field);
    if (is_begin || field != open_field) {
      // B always starts an entity. An I with no open entity of the same
      // field is repaired by treating it as a begin.
      per_field[field].push_back({t, t});
      open_field = field;
    } else {
      per_field[field].back().end = t;
    }
  }

  std::vector<SpanAnnotation> out;
  for (int f = 0; f < num_fields; ++f)
    if (!per_field[f].empty()) out.push_back({f, std::move(per_field[f])});
  return out;
}

}  // namespace spanie
