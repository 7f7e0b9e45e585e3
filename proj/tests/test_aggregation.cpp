#include <catch2/catch_amalgamated.hpp>

#include "spanie/aggregation.hpp"
#include "spanie/rng.hpp"

using namespace spanie;

namespace {

SpanPrediction prediction_with(const std::vector<std::optional<Span>>& spans) {
  SpanPrediction pred;
  for (const auto& s : spans) {
    FieldSpanPrediction f;
    f.span = s;
    pred.fields.push_back(std::move(f));
  }
  return pred;
}

// Brute-force reference: for each field enumerate every (span-head, ner) pair
// and test the intervals for intersection the slow way.
AggregatedExtraction reference_aggregate(const SpanPrediction& span_pred,
                                         const std::vector<SpanAnnotation>& ner_spans, int m) {
  AggregatedExtraction out;
  out.fields.resize(m);
  for (int f = 0; f < m; ++f) {
    std::vector<TaggedSpan> collected;
    if (span_pred.fields[f].span.has_value())
      collected.push_back({*span_pred.fields[f].span, SpanSource::kSpanHead});
    for (const auto& ann : ner_spans) {
      if (ann.field_index != f) continue;
      for (const auto& s : ann.spans) {
        bool hits_chosen = false;
        if (span_pred.fields[f].span.has_value()) {
          const Span& c = *span_pred.fields[f].span;
          for (int t = s.start; t <= s.end && !hits_chosen; ++t)
            hits_chosen = t >= c.start && t <= c.end;
        }
        if (!hits_chosen) collected.push_back({s, SpanSource::kNerHead});
      }
    }
    std::stable_sort(collected.begin(), collected.end(),
                     [](const TaggedSpan& a, const TaggedSpan& b) {
                       if (a.span.start != b.span.start) return a.span.start < b.span.start;
                       if (a.source != b.source) return a.source == SpanSource::kSpanHead;
                       return a.span.end < b.span.end;
                     });
    out.fields[f] = std::move(collected);
  }
  return out;
}

}  // namespace

TEST_CASE("span priority drops overlapping ner span, keeps distant one") {
  auto pred = prediction_with({Span{2, 4}});
  std::vector<SpanAnnotation> ner{{0, {{3, 5}, {8, 9}}}};
  auto agg = aggregate(pred, ner, 1);
  REQUIRE(agg.fields[0].size() == 2);
  REQUIRE(agg.fields[0][0] == TaggedSpan{{2, 4}, SpanSource::kSpanHead});
  REQUIRE(agg.fields[0][1] == TaggedSpan{{8, 9}, SpanSource::kNerHead});
}

TEST_CASE("no-answer fields pass ner spans through") {
  auto pred = prediction_with({std::nullopt});
  std::vector<SpanAnnotation> ner{{0, {{1, 1}}}};
  auto agg = aggregate(pred, ner, 1);
  REQUIRE(agg.fields[0].size() == 1);
  REQUIRE(agg.fields[0][0] == TaggedSpan{{1, 1}, SpanSource::kNerHead});
}

TEST_CASE("overlap suppression is per field") {
  auto pred = prediction_with({Span{2, 4}, std::nullopt});
  std::vector<SpanAnnotation> ner{{1, {{2, 4}}}};  // same interval, different field
  auto agg = aggregate(pred, ner, 2);
  REQUIRE(agg.fields[0].size() == 1);
  REQUIRE(agg.fields[0][0].source == SpanSource::kSpanHead);
  REQUIRE(agg.fields[1].size() == 1);
  REQUIRE(agg.fields[1][0] == TaggedSpan{{2, 4}, SpanSource::kNerHead});
}

TEST_CASE("aggregation never edits span boundaries") {
  auto pred = prediction_with({Span{5, 7}});
  std::vector<SpanAnnotation> ner{{0, {{6, 9}}}};  // partial overlap is still an overlap
  auto agg = aggregate(pred, ner, 1);
  REQUIRE(agg.fields[0].size() == 1);
  REQUIRE(agg.fields[0][0].span == Span{5, 7});
}

TEST_CASE("identity behaviours") {
  // span predictions alone survive untouched
  auto pred = prediction_with({Span{0, 1}, Span{4, 4}});
  auto agg = aggregate(pred, {}, 2);
  REQUIRE(agg.fields[0].size() == 1);
  REQUIRE(agg.fields[1].size() == 1);

  // all-NO_ANSWER passes ner output through unchanged
  auto empty_pred = prediction_with({std::nullopt, std::nullopt});
  std::vector<SpanAnnotation> ner{{0, {{1, 2}, {5, 6}}}, {1, {{0, 0}}}};
  auto agg2 = aggregate(empty_pred, ner, 2);
  REQUIRE(agg2.fields[0].size() == 2);
  REQUIRE(agg2.fields[1].size() == 1);
  for (const auto& field : agg2.fields)
    for (const auto& ts : field) REQUIRE(ts.source == SpanSource::kNerHead);
}

TEST_CASE("aggregation matches the brute-force reference on 1000 random cases") {
  Rng rng(4242);
  for (int iter = 0; iter < 1000; ++iter) {
    const int n = rng_int(rng, 1, 12);
    const int m = rng_int(rng, 1, 3);
    SpanPrediction pred;
    for (int f = 0; f < m; ++f) {
      FieldSpanPrediction fp;
      if (rng_unit(rng) < 0.7) {
        const int s = rng_int(rng, 0, n - 1);
        fp.span = Span{s, rng_int(rng, s, n - 1)};
      }
      pred.fields.push_back(std::move(fp));
    }
    std::vector<SpanAnnotation> ner;
    for (int f = 0; f < m; ++f) {
      SpanAnnotation ann{f, {}};
      // random non-overlapping spans within the field
      int at = 0;
      while (at < n && rng_unit(rng) < 0.55) {
        const int s = rng_int(rng, at, n - 1);
        const int e = rng_int(rng, s, std::min(n - 1, s + 3));
        ann.spans.push_back({s, e});
        at = e + 2;
      }
      if (!ann.spans.empty()) ner.push_back(std::move(ann));
    }
    auto fast = aggregate(pred, ner, m);
    auto slow = reference_aggregate(pred, ner, m);
    REQUIRE(fast == slow);

    // invariant: no surviving ner span overlaps the chosen span of its field
    for (int f = 0; f < m; ++f) {
      for (const auto& ts : fast.fields[f]) {
        if (ts.source == SpanSource::kNerHead && pred.fields[f].span.has_value())
          REQUIRE(!ts.span.overlaps(*pred.fields[f].span));
      }
      long span_head_count = 0;
      for (const auto& ts : fast.fields[f])
        span_head_count += ts.source == SpanSource::kSpanHead ? 1 : 0;
      REQUIRE(span_head_count <= 1);
    }
  }
}
