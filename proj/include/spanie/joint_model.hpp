#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spanie/aggregation.hpp"
#include "spanie/bio.hpp"
#include "spanie/checkpoint.hpp"
#include "spanie/encoder.hpp"
#include "spanie/losses.hpp"
#include "spanie/ner_head.hpp"
#include "spanie/span_head.hpp"
#include "spanie/types.hpp"
#include "spanie/vocab.hpp"
#include "spanie/windowing.hpp"

namespace spanie {

struct JointModelConfig {
  ToyTransformerConfig encoder;  // vocab_size is overwritten from the vocabulary
  int query_dim = 0;             // 0 means: use the encoder output dim
  int span_depth = 1;
  int window_length = 384;
  int stride = 128;
  double alpha_init = 0.5;

  void validate() const {
    if (window_length < 2) throw ConfigError("window_length must be >= 2");
    if (stride < 1 || stride > window_length)
      throw ConfigError("stride must be in [1, window_length]");
    if (span_depth < 1 || span_depth > 3) throw ConfigError("span_depth must be in [1,3]");
  }
};

struct GraphLosses {
  ad::Var total;
  ad::Var span;
  ad::Var ner;
  double alpha = 0.5;
};

struct ModelOutputs {
  SpanPrediction span;
  TokenLabelDistribution ner;
  AggregatedExtraction aggregated;
};

// The joint extractor: one shared windowed document encoding feeds every
// per-field span head and the BIO token classifier; outputs are merged with
// span priority. Encoding cost per document does not depend on the number of
// fields.
class JointModel {
 public:
  JointModel(FieldSchema schema, Vocabulary vocab, JointModelConfig cfg)
      : schema_(std::move(schema)),
        vocab_(std::move(vocab)),
        cfg_(normalize(cfg, vocab_)),
        encoder_(cfg_.encoder),
        alpha_raw_("loss.alpha_raw", 1, 1) {
    validate_schema(schema_);
    Rng rng(cfg_.encoder.parameter_init_seed ^ 0xa5f152u);
    const int c = encoder_.output_dim();
    const int d = cfg_.query_dim;
    query_matrix_ = ad::Param("span.V", schema_.size(), d);
    init_normal(query_matrix_, rng, 0.02);
    span_heads_ = make_span_heads(schema_.size(), d, c, cfg_.span_depth, rng);
    ner_ = make_ner_head(c, schema_.size(), rng);
    alpha_raw_.value(0, 0) = alpha_raw_for(cfg_.alpha_init);
  }

  const FieldSchema& schema() const { return schema_; }
  const Vocabulary& vocab() const { return vocab_; }
  const JointModelConfig& config() const { return cfg_; }
  ToyTransformerEncoder& encoder() { return encoder_; }
  ad::Param& alpha_raw() { return alpha_raw_; }
  double alpha() const { return 1.0 / (1.0 + std::exp(-alpha_raw_.value(0, 0))); }

  // Token ids of the sentinel-augmented document: <null> then the tokens.
  std::vector<int> augmented_ids(const Document& doc) const {
    std::vector<int> ids;
    ids.reserve(doc.tokens.size() + 1);
    ids.push_back(Vocabulary::kNullId);
    for (const auto& tok : doc.tokens) ids.push_back(vocab_.id_of(tok));
    return ids;
  }

  WindowPlan plan_for(const Document& doc) const {
    return plan_windows(doc.size() + 1, cfg_.window_length, cfg_.stride);
  }

  // Emits the whole training computation for one example onto a tape.
  GraphLosses build_training_graph(ad::Tape& tape, const LabeledExample& example, LossMode mode,
                                   bool train_mode = true, Rng* dropout_rng = nullptr) {
    const int n = example.document.size();
    const int m = schema_.size();
    const std::vector<int> ids = augmented_ids(example.document);
    const WindowPlan plan = plan_for(example.document);
    ad::Var encoded = build_windowed_encoding(tape, encoder_, ids, plan, train_mode, dropout_rng);

    ad::Var queries = tape.param(query_matrix_);
    std::vector<SpanLogits> logits;
    logits.reserve(m);
    for (int i = 0; i < m; ++i)
      logits.push_back(build_span_logits(tape, encoded, queries, i, span_heads_[i]));
    ad::Var span_loss = build_span_loss(tape, logits, make_span_targets(example, m));

    ad::Var doc_rows = ad::slice_rows(encoded, 1, n);
    ad::Var ner_logits = build_ner_logits(tape, doc_rows, ner_);
    ad::Var ner_loss = build_ner_loss(tape, ner_logits, bio_encode(example.annotations, n, m));

    CombinedLoss combined = combine_losses(tape, span_loss, ner_loss, mode, &alpha_raw_);
    return GraphLosses{combined.total, combined.span, combined.ner, combined.alpha};
  }

  // Windowed encoding with the sentinel row at index 0.
  EncodedDocument encode_document(const Document& doc, bool train_mode = false) {
    const std::vector<int> ids = augmented_ids(doc);
    return encode_with_averaging(ids, plan_for(doc), encoder_, train_mode);
  }

  ModelOutputs predict(const Document& doc) {
    const EncodedDocument encoded = encode_document(doc);
    ModelOutputs out;
    out.span = predict_spans(encoded.vectors, query_matrix_.value, span_heads_);
    out.ner = ner_scores(encoded.vectors.bottomRows(doc.size()), ner_);
    out.aggregated = aggregate(out.span, ner_predict(out.ner, schema_.size()), schema_.size());
    return out;
  }

  std::vector<ad::Param*> parameters() {
    std::vector<ad::Param*> out = encoder_.parameters();
    out.push_back(&query_matrix_);
    for (auto& head : span_heads_) {
      for (auto& p : head.start_stack) out.push_back(&p);
      for (auto& p : head.end_stack) out.push_back(&p);
    }
    out.push_back(&ner_.weight);
    out.push_back(&ner_.bias);
    out.push_back(&alpha_raw_);
    return out;
  }

  nlohmann::json config_json() const {
    return {{"model", "joint"},
            {"window_length", cfg_.window_length},
            {"stride", cfg_.stride},
            {"span_depth", cfg_.span_depth},
            {"query_dim", cfg_.query_dim},
            {"alpha_init", cfg_.alpha_init},
            {"encoder",
             {{"vocab_size", cfg_.encoder.vocab_size},
              {"embed_dim", cfg_.encoder.embed_dim},
              {"num_layers", cfg_.encoder.num_layers},
              {"num_heads", cfg_.encoder.num_heads},
              {"feedforward_dim", cfg_.encoder.feedforward_dim},
              {"max_position", cfg_.encoder.max_position},
              {"dropout", cfg_.encoder.dropout},
              {"parameter_init_seed", cfg_.encoder.parameter_init_seed}}}};
  }

  void save_checkpoint(const std::filesystem::path& path) {
    std::vector<const ad::Param*> params;
    for (auto* p : parameters()) params.push_back(p);
    spanie::save_checkpoint(path, "joint", config_json(), schema_, vocab_, params);
  }

  static JointModel load_checkpoint(const std::filesystem::path& path) {
    LoadedCheckpoint loaded = load_checkpoint_file(path);
    if (loaded.header.model_type != "joint")
      throw ConfigError("checkpoint holds a '" + loaded.header.model_type +
                        "' model, expected 'joint'");
    JointModel model(make_schema(loaded.header.schema_names),
                     Vocabulary::from_tokens(loaded.header.vocab_tokens),
                     config_from_json(loaded.header.config));
    for (auto* p : model.parameters()) loaded.restore(*p);
    return model;
  }

  static JointModelConfig config_from_json(const nlohmann::json& j) {
    JointModelConfig cfg;
    cfg.window_length = j.at("window_length").get<int>();
    cfg.stride = j.at("stride").get<int>();
    cfg.span_depth = j.at("span_depth").get<int>();
    cfg.query_dim = j.at("query_dim").get<int>();
    cfg.alpha_init = j.at("alpha_init").get<double>();
    const auto& e = j.at("encoder");
    cfg.encoder.vocab_size = e.at("vocab_size").get<int>();
    cfg.encoder.embed_dim = e.at("embed_dim").get<int>();
    cfg.encoder.num_layers = e.at("num_layers").get<int>();
    cfg.encoder.num_heads = e.at("num_heads").get<int>();
    cfg.encoder.feedforward_dim = e.at("feedforward_dim").get<int>();
    cfg.encoder.max_position = e.at("max_position").get<int>();
    cfg.encoder.dropout = e.at("dropout").get<double>();
    cfg.encoder.parameter_init_seed = e.at("parameter_init_seed").get<std::uint64_t>();
    return cfg;
  }

 private:
  static JointModelConfig normalize(JointModelConfig cfg, const Vocabulary& vocab) {
    cfg.encoder.vocab_size = vocab.size();
    cfg.encoder.max_position = cfg.window_length;  // inputs are always windowed first
    if (cfg.query_dim <= 0) cfg.query_dim = cfg.encoder.embed_dim;
    cfg.validate();
    cfg.encoder.validate();
    return cfg;
  }

  FieldSchema schema_;
  Vocabulary vocab_;
  JointModelConfig cfg_;
  ToyTransformerEncoder encoder_;
  ad::Param query_matrix_;
  std::vector<FieldSpanHead> span_heads_;
  NerHead ner_;
  ad::Param alpha_raw_;
};

}  // namespace spanie
