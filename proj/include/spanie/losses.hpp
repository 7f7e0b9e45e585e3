#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "spanie/autodiff.hpp"
#include "spanie/span_head.hpp"
#include "spanie/types.hpp"

namespace spanie {

enum class LossMode { kSum, kLearnableAlpha };

inline std::string to_string(LossMode m) {
  return m == LossMode::kSum ? "sum" : "learnable_alpha";
}

inline LossMode loss_mode_from_string(const std::string& s) {
  if (s == "sum") return LossMode::kSum;
  if (s == "learnable_alpha") return LossMode::kLearnableAlpha;
  throw ConfigError("unknown loss_mode '" + s + "' (expected sum | learnable_alpha)");
}

// Gold start/end positions per field in sentinel coordinates: position 0 is
// the no-answer sentinel, token t maps to position t+1. Fields without a gold
// span target the sentinel; fields with several gold spans target the first
// one only (the remaining spans are the NER head's job).
struct SpanTargets {
  std::vector<int> start;
  std::vector<int> end;
};

inline SpanTargets make_span_targets(const LabeledExample& example, int num_fields) {
  const int n = example.document.size();
  SpanTargets targets;
  targets.start.assign(num_fields, 0);
  targets.end.assign(num_fields, 0);
  for (const auto& ann : example.annotations) {
    if (ann.field_index < 0 || ann.field_index >= num_fields)
      throw ValidationError("span targets: field index out of range");
    if (ann.spans.empty()) continue;
    const Span& first = ann.spans.front();
    if (first.start < 0 || first.start > first.end || first.end >= n)
      throw ValidationError("span targets: gold span " + to_string(first) +
                            " out of range in doc '" + example.document.doc_id + "'");
    targets.start[ann.field_index] = first.start + 1;
    targets.end[ann.field_index] = first.end + 1;
  }
  return targets;
}

// Mean over fields of CE(start) + CE(end).
inline ad::Var build_span_loss(ad::Tape& tape, const std::vector<SpanLogits>& logits,
                               const SpanTargets& targets) {
  const int m = static_cast<int>(logits.size());
  if (static_cast<int>(targets.start.size()) != m)
    throw ConfigError("span loss: target count does not match field count");
  ad::Var total = tape.constant(Mat::Zero(1, 1));
  for (int i = 0; i < m; ++i) {
    total = ad::add(total, ad::cross_entropy_rows(logits[i].start, {targets.start[i]}));
    total = ad::add(total, ad::cross_entropy_rows(logits[i].end, {targets.end[i]}));
  }
  return ad::scale(total, 1.0 / m);
}

// Mean over tokens of CE against the gold BIO labels.
inline ad::Var build_ner_loss(ad::Tape& tape, ad::Var ner_logits, const BioSequence& gold) {
  (void)tape;
  if (ner_logits.rows() != gold.size())
    throw ValidationError("ner loss: " + std::to_string(gold.size()) + " gold labels for " +
                          std::to_string(ner_logits.rows()) + " tokens");
  return ad::cross_entropy_rows(ner_logits, gold.labels);
}

struct CombinedLoss {
  ad::Var total;
  ad::Var span;
  ad::Var ner;
  double alpha = 0.5;  // the applied span weight; 1/2-equivalent in sum mode
};

// Sum mode adds the two losses as-is. Learnable-alpha mode forms the convex
// combination a*span + (1-a)*ner with a = sigmoid(raw), so a stays in (0,1)
// and the raw parameter receives gradient.
inline CombinedLoss combine_losses(ad::Tape& tape, ad::Var span_loss, ad::Var ner_loss,
                                   LossMode mode, ad::Param* alpha_raw) {
  CombinedLoss out{span_loss, span_loss, ner_loss, 0.5};
  if (mode == LossMode::kSum) {
    out.total = ad::add(span_loss, ner_loss);
    return out;
  }
  if (alpha_raw == nullptr) throw ConfigError("learnable_alpha mode requires the alpha parameter");
  ad::Var alpha = ad::sigmoid(tape.param(*alpha_raw));
  out.alpha = alpha.scalar();
  out.total = ad::add(ad::cmul(alpha, span_loss), ad::cmul(ad::affine(alpha, -1.0, 1.0), ner_loss));
  return out;
}

inline double alpha_raw_for(double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("alpha_init must lie strictly in (0,1)");
  return std::log(alpha / (1.0 - alpha));
}

// ---- value-path losses (probabilities in, scalar out) ---------------------

inline double cross_entropy_value(const Vec& probs, int target) {
  if (target < 0 || target >= probs.size())
    throw ValidationError("cross entropy: target out of range");
  return -std::log(std::max(probs(target), 1e-300));
}

inline double span_loss_value(const std::vector<FieldSpanScores>& scores,
                              const SpanTargets& targets) {
  const int m = static_cast<int>(scores.size());
  if (static_cast<int>(targets.start.size()) != m)
    throw ConfigError("span loss: target count does not match field count");
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    total += cross_entropy_value(scores[i].start_probs, targets.start[i]);
    total += cross_entropy_value(scores[i].end_probs, targets.end[i]);
  }
  return total / m;
}

inline double ner_loss_value(const Mat& probs, const BioSequence& gold) {
  if (probs.rows() != gold.size())
    throw ValidationError("ner loss: " + std::to_string(gold.size()) + " gold labels for " +
                          std::to_string(probs.rows()) + " rows");
  double total = 0.0;
  for (int r = 0; r < probs.rows(); ++r)
    total += cross_entropy_value(probs.row(r).transpose(), gold.labels[r]);
  return total / probs.rows();
}

}  // namespace spanie
