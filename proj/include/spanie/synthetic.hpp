#pragma once

#include <array>
#include <string>
#include <vector>

#include "spanie/rng.hpp"
#include "spanie/types.hpp"

namespace spanie {

// Knobs for the template generator. Documents are filler tokens with a few
// trigger-plus-answer segments planted per field: "<field> : <answer ...>".
// Field names double as trigger tokens, and each field draws answers from its
// own small token pool, so schema name tokens are always in-vocabulary.
struct SyntheticSpec {
  std::uint64_t seed = 7;
  int size = 50;
  int num_fields = 4;
  double multispan_rate = 0.1072;
  double no_answer_rate = 0.10;
  int min_length = 500;
  int max_length = 700;
  int filler_vocab = 160;
  int answers_per_field = 6;
  std::string doc_id_prefix = "syn";

  void validate() const {
    if (size < 1) throw ConfigError("synthetic: size must be >= 1");
    if (num_fields < 1) throw ConfigError("synthetic: num_fields must be >= 1");
    if (multispan_rate < 0.0 || multispan_rate > 1.0 || no_answer_rate < 0.0 ||
        no_answer_rate > 1.0)
      throw ConfigError("synthetic: rates must lie in [0,1]");
    if (min_length < 8 || max_length < min_length)
      throw ConfigError("synthetic: bad length range");
    if (filler_vocab < 1 || answers_per_field < 2)
      throw ConfigError("synthetic: vocab sizes too small");
  }
};

struct SyntheticStats {
  int documents = 0;
  int fields = 0;
  long answered_fields = 0;   // (doc, field) pairs with >= 1 span
  long multispan_fields = 0;  // (doc, field) pairs with >= 2 spans
  long total_spans = 0;
  long total_tokens = 0;
  long answer_tokens = 0;
  double avg_length = 0.0;

  double multispan_fraction() const {
    return answered_fields == 0 ? 0.0
                                : static_cast<double>(multispan_fields) / answered_fields;
  }
  double answer_token_fraction() const {
    return total_tokens == 0 ? 0.0 : static_cast<double>(answer_tokens) / total_tokens;
  }
};

struct SyntheticCorpus {
  FieldSchema schema;
  std::vector<LabeledExample> examples;
  SyntheticStats stats;
};

namespace detail {

inline std::vector<std::string> synthetic_field_names(int num_fields) {
  static const std::array<const char*, 16> base = {
      "amount",  "party",   "issued",  "deadline", "venue",   "contact",
      "subject", "period",  "owner",   "status",   "region",  "category",
      "agent",   "payment", "duration", "currency"};
  std::vector<std::string> names;
  for (int i = 0; i < num_fields; ++i) {
    std::string name = base[i % base.size()];
    if (i >= static_cast<int>(base.size())) name += std::to_string(i / base.size() + 1);
    names.push_back(std::move(name));
  }
  return names;
}

}  // namespace detail

inline SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticCorpus corpus;
  corpus.schema = make_schema(detail::synthetic_field_names(spec.num_fields));
  corpus.stats.documents = spec.size;
  corpus.stats.fields = spec.num_fields;

  std::vector<std::string> filler(spec.filler_vocab);
  for (int i = 0; i < spec.filler_vocab; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%03d", i);
    filler[i] = buf;
  }

  for (int d = 0; d < spec.size; ++d) {
    const int n = rng_int(rng, spec.min_length, spec.max_length);
    LabeledExample ex;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "%s-%04d", spec.doc_id_prefix.c_str(), d);
    ex.document.doc_id = idbuf;
    ex.document.tokens.resize(n);
    for (int t = 0; t < n; ++t)
      ex.document.tokens[t] = filler[rng_int(rng, 0, spec.filler_vocab - 1)];

    std::vector<bool> occupied(n, false);
    for (int f = 0; f < spec.num_fields; ++f) {
      int want = 0;
      if (rng_unit(rng) >= spec.no_answer_rate)
        want = rng_unit(rng) < spec.multispan_rate ? rng_int(rng, 2, 3) : 1;
      SpanAnnotation ann{f, {}};
      const std::string& field_name = corpus.schema.fields[f].name;
      for (int k = 0; k < want; ++k) {
        const int answer_len = rng_int(rng, 1, 2);
        const int seg_len = 2 + answer_len;  // trigger token + ':' + answer
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
          const int pos = rng_int(rng, 0, n - seg_len);
          bool free = true;
          for (int t = std::max(0, pos - 1); t <= std::min(n - 1, pos + seg_len); ++t)
            free = free && !occupied[t];
          if (!free) continue;
          ex.document.tokens[pos] = field_name;
          ex.document.tokens[pos + 1] = ":";
          // answers open with a head token and continue with tokens from a
          // separate per-field pool, like a value followed by its unit
          ex.document.tokens[pos + 2] =
              field_name + "_v" + std::to_string(rng_int(rng, 0, spec.answers_per_field - 1));
          for (int a = 1; a < answer_len; ++a)
            ex.document.tokens[pos + 2 + a] =
                field_name + "_x" + std::to_string(rng_int(rng, 0, spec.answers_per_field - 1));
          for (int t = pos; t < pos + seg_len; ++t) occupied[t] = true;
          ann.spans.push_back({pos + 2, pos + seg_len - 1});
          corpus.stats.answer_tokens += answer_len;
          placed = true;
        }
      }
      std::sort(ann.spans.begin(), ann.spans.end());
      if (!ann.spans.empty()) {
        corpus.stats.answered_fields += 1;
        if (ann.spans.size() >= 2) corpus.stats.multispan_fields += 1;
        corpus.stats.total_spans += static_cast<long>(ann.spans.size());
        ex.annotations.push_back(std::move(ann));
      }
    }
    corpus.stats.total_tokens += n;
    validate_example(ex, corpus.schema);
    corpus.examples.push_back(std::move(ex));
  }
  corpus.stats.avg_length =
      static_cast<double>(corpus.stats.total_tokens) / corpus.stats.documents;
  return corpus;
}

}  // namespace spanie
