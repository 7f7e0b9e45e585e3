#pragma once

#include <vector>

#include "spanie/autodiff.hpp"
#include "spanie/bio.hpp"
#include "spanie/types.hpp"

namespace spanie {

// Token classification head: dense layer into 2m+1 BIO logits per token.
struct NerHead {
  ad::Param weight;  // encoder_dim x n_e
  ad::Param bias;    // 1 x n_e
};

inline NerHead make_ner_head(int encoder_dim, int num_fields, Rng& rng, double init_std = 0.02) {
  NerHead head{ad::Param("ner.W", encoder_dim, bio_label_count(num_fields)),
               ad::Param("ner.bias", 1, bio_label_count(num_fields))};
  init_normal(head.weight, rng, init_std);
  return head;
}

inline ad::Var build_ner_logits(ad::Tape& tape, ad::Var encoded_doc, NerHead& head) {
  return ad::add_rowwise(ad::matmul(encoded_doc, tape.param(head.weight)),
                         tape.param(head.bias));
}

struct TokenLabelDistribution {
  Mat probs;  // n x n_e, each row sums to 1
  BioSequence argmax_labels;
};

// Per-token label distributions over the averaged (sentinel-free) encoding.
inline TokenLabelDistribution ner_scores(const Mat& encoded_doc, const NerHead& head) {
  if (encoded_doc.cols() != head.weight.value.rows())
    throw ConfigError("ner_scores: encoding dim " + std::to_string(encoded_doc.cols()) +
                      " does not match head dim " + std::to_string(head.weight.value.rows()));
  ad::Tape tape;
  ad::Var logits = ad::add_rowwise(
      ad::matmul(tape.constant(encoded_doc), tape.constant(head.weight.value)),
      tape.constant(head.bias.value));
  TokenLabelDistribution dist;
  dist.probs = tape.value(ad::softmax_rows(logits));
  dist.argmax_labels.labels.resize(dist.probs.rows());
  for (int r = 0; r < dist.probs.rows(); ++r) {
    int best = 0;
    for (int k = 1; k < dist.probs.cols(); ++k)
      if (dist.probs(r, k) > dist.probs(r, best)) best = k;
    dist.argmax_labels.labels[r] = best;
  }
  return dist;
}

inline std::vector<SpanAnnotation> ner_predict(const TokenLabelDistribution& dist,
                                               int num_fields) {
  return bio_decode(dist.argmax_labels, num_fields);
}

}  // namespace spanie
