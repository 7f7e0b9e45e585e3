#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spanie/autodiff.hpp"
#include "spanie/types.hpp"

namespace spanie {

// Per-field projection stacks for the start and end attention scores. Depth 1
// is a single linear map (the bilinear score v' W h); deeper stacks insert a
// GELU between consecutive maps.
struct FieldSpanHead {
  std::vector<ad::Param> start_stack;
  std::vector<ad::Param> end_stack;
};

inline std::vector<FieldSpanHead> make_span_heads(int num_fields, int query_dim, int encoder_dim,
                                                  int depth, Rng& rng, double init_std = 0.02) {
  if (depth < 1 || depth > 3) throw ConfigError("span head depth must be in [1,3]");
  std::vector<FieldSpanHead> heads;
  heads.reserve(num_fields);
  for (int i = 0; i < num_fields; ++i) {
    FieldSpanHead head;
    for (int k = 0; k < depth; ++k) {
      const int in = k == 0 ? encoder_dim : query_dim;
      ad::Param ws("span.start." + std::to_string(i) + "." + std::to_string(k), query_dim, in);
      ad::Param we("span.end." + std::to_string(i) + "." + std::to_string(k), query_dim, in);
      init_normal(ws, rng, init_std);
      init_normal(we, rng, init_std);
      head.start_stack.push_back(std::move(ws));
      head.end_stack.push_back(std::move(we));
    }
    heads.push_back(std::move(head));
  }
  return heads;
}

namespace detail {
inline ad::Var apply_projection_stack(ad::Var x, const std::vector<ad::Var>& stack) {
  for (std::size_t k = 0; k < stack.size(); ++k) {
    x = ad::matmul_bt(x, stack[k]);
    if (k + 1 < stack.size()) x = ad::gelu(x);
  }
  return x;
}
}  // namespace detail

// Position logits for one field over the sentinel-augmented encoding:
// logit_j = v_i . (stack applied to h_j). Returns a 1 x (n+1) row.
inline ad::Var span_position_logits(ad::Var encoded_with_sentinel, ad::Var query_row,
                                    const std::vector<ad::Var>& stack) {
  if (stack.empty()) throw ConfigError("span head: empty projection stack");
  ad::Var projected = detail::apply_projection_stack(encoded_with_sentinel, stack);
  if (projected.cols() != query_row.cols())
    throw ConfigError("span head: query dim " + std::to_string(query_row.cols()) +
                      " does not match projected dim " + std::to_string(projected.cols()));
  return ad::matmul_bt(query_row, projected);  // 1 x (n+1)
}

struct SpanLogits {
  ad::Var start;
  ad::Var end;
};

// Graph path used in training: parameters participate in backward.
inline SpanLogits build_span_logits(ad::Tape& tape, ad::Var encoded_with_sentinel,
                                    ad::Var query_matrix, int field_index, FieldSpanHead& head) {
  ad::Var query_row = ad::gather_rows(query_matrix, {field_index});
  std::vector<ad::Var> start_vars, end_vars;
  for (auto& p : head.start_stack) start_vars.push_back(tape.param(p));
  for (auto& p : head.end_stack) end_vars.push_back(tape.param(p));
  return SpanLogits{span_position_logits(encoded_with_sentinel, query_row, start_vars),
                    span_position_logits(encoded_with_sentinel, query_row, end_vars)};
}

struct FieldSpanScores {
  Vec start_probs;  // length n+1, position 0 is the no-answer sentinel
  Vec end_probs;
};

// Start/end distributions for every field from one shared document encoding.
// No encoder is involved here, which is what makes the per-document encoding
// cost independent of the number of fields.
inline std::vector<FieldSpanScores> span_scores(const Mat& encoded_with_sentinel, const Mat& V,
                                                const std::vector<FieldSpanHead>& heads) {
  if (V.rows() != static_cast<Eigen::Index>(heads.size()))
    throw ConfigError("span_scores: query matrix has " + std::to_string(V.rows()) +
                      " rows for " + std::to_string(heads.size()) + " heads");
  ad::Tape tape;
  ad::Var enc = tape.constant(encoded_with_sentinel);
  ad::Var queries = tape.constant(V);
  std::vector<FieldSpanScores> out;
  out.reserve(heads.size());
  for (std::size_t i = 0; i < heads.size(); ++i) {
    ad::Var query_row = ad::gather_rows(queries, {static_cast<int>(i)});
    std::vector<ad::Var> sv, ev;
    for (const auto& p : heads[i].start_stack) sv.push_back(tape.constant(p.value));
    for (const auto& p : heads[i].end_stack) ev.push_back(tape.constant(p.value));
    const Mat sp = tape.value(ad::softmax_rows(span_position_logits(enc, query_row, sv)));
    const Mat ep = tape.value(ad::softmax_rows(span_position_logits(enc, query_row, ev)));
    out.push_back({sp.row(0).transpose(), ep.row(0).transpose()});
  }
  return out;
}

inline int argmax(const Vec& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

struct FieldSpanPrediction {
  Vec start_probs;
  Vec end_probs;
  int start_pos = 0;  // argmax in sentinel coordinates
  int end_pos = 0;
  std::optional<Span> span;  // document coordinates; nullopt = no answer
};

struct SpanPrediction {
  std::vector<FieldSpanPrediction> fields;
};

// Argmax resolution with the sentinel rule: either peak on the sentinel means
// no answer, and an inverted pair (start after end) also resolves to no
// answer rather than being forced into a span.
inline std::optional<Span> resolve_span(const Vec& start_probs, const Vec& end_probs) {
  if (start_probs.size() != end_probs.size() || start_probs.size() < 2)
    throw ConfigError("resolve_span: malformed probability vectors");
  const int s = argmax(start_probs);
  const int e = argmax(end_probs);
  if (s == 0 || e == 0) return std::nullopt;
  if (s > e) return std::nullopt;
  return Span{s - 1, e - 1};
}

inline SpanPrediction predict_spans(const Mat& encoded_with_sentinel, const Mat& V,
                                    const std::vector<FieldSpanHead>& heads) {
  SpanPrediction pred;
  for (auto& scores : span_scores(encoded_with_sentinel, V, heads)) {
    FieldSpanPrediction f;
    f.start_pos = argmax(scores.start_probs);
    f.end_pos = argmax(scores.end_probs);
    f.span = resolve_span(scores.start_probs, scores.end_probs);
    f.start_probs = std::move(scores.start_probs);
    f.end_probs = std::move(scores.end_probs);
    pred.fields.push_back(std::move(f));
  }
  return pred;
}

}  // namespace spanie
