#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spanie/aggregation.hpp"
#include "spanie/checkpoint.hpp"
#include "spanie/encoder.hpp"
#include "spanie/joint_model.hpp"
#include "spanie/losses.hpp"
#include "spanie/span_head.hpp"
#include "spanie/types.hpp"
#include "spanie/vocab.hpp"
#include "spanie/windowing.hpp"

namespace spanie {

struct PairwiseModelConfig {
  ToyTransformerConfig encoder;
  int window_length = 384;
  int stride = 128;

  void validate() const {
    if (window_length < 2) throw ConfigError("window_length must be >= 2");
    if (stride < 1 || stride > window_length)
      throw ConfigError("stride must be in [1, window_length]");
  }
};

// The query-per-pass baseline: every field is encoded together with the
// document, so a document costs m encoding passes per window instead of one.
// It shares the window plan, vocabulary, sentinel rule, and loss shape with
// the joint model so timing differences isolate the encoding strategy. The
// field's name tokens plus a separator are prepended inside every window;
// the encoder's position budget is widened by the longest query so window
// geometry stays identical to the joint model's.
class PairwiseModel {
 public:
  PairwiseModel(FieldSchema schema, Vocabulary vocab, PairwiseModelConfig cfg)
      : schema_(std::move(schema)),
        vocab_(std::move(vocab)),
        cfg_(normalize(cfg, schema_, vocab_)),
        encoder_(cfg_.encoder),
        start_proj_("pairwise.start_proj", cfg_.encoder.embed_dim, 1),
        end_proj_("pairwise.end_proj", cfg_.encoder.embed_dim, 1) {
    validate_schema(schema_);
    Rng rng(cfg_.encoder.parameter_init_seed ^ 0x7e11aau);
    init_normal(start_proj_, rng, 0.02);
    init_normal(end_proj_, rng, 0.02);
    for (const auto& f : schema_.fields) {
      std::vector<int> q = vocab_.encode(f.name_tokens);
      q.push_back(Vocabulary::kPadId);  // separator between query and document
      query_ids_.push_back(std::move(q));
    }
  }

  const FieldSchema& schema() const { return schema_; }
  const Vocabulary& vocab() const { return vocab_; }
  const PairwiseModelConfig& config() const { return cfg_; }
  ToyTransformerEncoder& encoder() { return encoder_; }

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

  GraphLosses build_training_graph(ad::Tape& tape, const LabeledExample& example, LossMode,
                                   bool train_mode = true, Rng* dropout_rng = nullptr) {
    const int m = schema_.size();
    const SpanTargets targets = make_span_targets(example, m);
    ad::Var total = tape.constant(Mat::Zero(1, 1));
    for (int i = 0; i < m; ++i) {
      ad::Var field_enc = build_field_encoding(tape, example.document, i, train_mode, dropout_rng);
      ad::Var start_logits = ad::transpose(ad::matmul(field_enc, tape.param(start_proj_)));
      ad::Var end_logits = ad::transpose(ad::matmul(field_enc, tape.param(end_proj_)));
      total = ad::add(total, ad::cross_entropy_rows(start_logits, {targets.start[i]}));
      total = ad::add(total, ad::cross_entropy_rows(end_logits, {targets.end[i]}));
    }
    ad::Var span_loss = ad::scale(total, 1.0 / m);
    return GraphLosses{span_loss, span_loss, tape.constant(Mat::Zero(1, 1)), 0.5};
  }

  ModelOutputs predict(const Document& doc) {
    ModelOutputs out;
    ad::Tape tape;
    for (int i = 0; i < schema_.size(); ++i) {
      ad::Var field_enc = build_field_encoding(tape, doc, i, false, nullptr);
      const Mat sp = tape.value(
          ad::softmax_rows(ad::transpose(ad::matmul(field_enc, tape.constant(start_proj_.value)))));
      const Mat ep = tape.value(
          ad::softmax_rows(ad::transpose(ad::matmul(field_enc, tape.constant(end_proj_.value)))));
      FieldSpanPrediction f;
      f.start_probs = sp.row(0).transpose();
      f.end_probs = ep.row(0).transpose();
      f.start_pos = argmax(f.start_probs);
      f.end_pos = argmax(f.end_probs);
      f.span = resolve_span(f.start_probs, f.end_probs);
      out.span.fields.push_back(std::move(f));
    }
    out.aggregated = aggregate(out.span, {}, schema_.size());
    return out;
  }

  std::vector<ad::Param*> parameters() {
    std::vector<ad::Param*> out = encoder_.parameters();
    out.push_back(&start_proj_);
    out.push_back(&end_proj_);
    return out;
  }

  nlohmann::json config_json() const {
    return {{"model", "pairwise"},
            {"window_length", cfg_.window_length},
            {"stride", cfg_.stride},
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
    spanie::save_checkpoint(path, "pairwise", config_json(), schema_, vocab_, params);
  }

  static PairwiseModel load_checkpoint(const std::filesystem::path& path) {
    LoadedCheckpoint loaded = load_checkpoint_file(path);
    if (loaded.header.model_type != "pairwise")
      throw ConfigError("checkpoint holds a '" + loaded.header.model_type +
                        "' model, expected 'pairwise'");
    PairwiseModelConfig cfg;
    const auto& j = loaded.header.config;
    cfg.window_length = j.at("window_length").get<int>();
    cfg.stride = j.at("stride").get<int>();
    const auto& e = j.at("encoder");
    cfg.encoder.embed_dim = e.at("embed_dim").get<int>();
    cfg.encoder.num_layers = e.at("num_layers").get<int>();
    cfg.encoder.num_heads = e.at("num_heads").get<int>();
    cfg.encoder.feedforward_dim = e.at("feedforward_dim").get<int>();
    cfg.encoder.dropout = e.at("dropout").get<double>();
    cfg.encoder.parameter_init_seed = e.at("parameter_init_seed").get<std::uint64_t>();
    PairwiseModel model(make_schema(loaded.header.schema_names),
                        Vocabulary::from_tokens(loaded.header.vocab_tokens), cfg);
    for (auto* p : model.parameters()) loaded.restore(*p);
    return model;
  }

 private:
  static PairwiseModelConfig normalize(PairwiseModelConfig cfg, const FieldSchema& schema,
                                       const Vocabulary& vocab) {
    cfg.encoder.vocab_size = vocab.size();
    int query_budget = 0;
    for (const auto& f : schema.fields)
      query_budget = std::max(query_budget, static_cast<int>(f.name_tokens.size()) + 1);
    cfg.encoder.max_position = cfg.window_length + query_budget;
    cfg.validate();
    cfg.encoder.validate();
    return cfg;
  }

  // One field's (n+1)-row encoding: encode [query, sep, window slice] for
  // every window of the shared plan, drop the query rows, then average the
  // document rows across windows.
  ad::Var build_field_encoding(ad::Tape& tape, const Document& doc, int field_index,
                               bool train_mode, Rng* dropout_rng) {
    const std::vector<int> ids = augmented_ids(doc);
    const WindowPlan plan = plan_for(doc);
    const std::vector<int>& query = query_ids_[field_index];
    const int qlen = static_cast<int>(query.size());
    std::vector<ad::Var> doc_parts;
    doc_parts.reserve(plan.windows.size());
    for (const auto& win : plan.windows) {
      std::vector<int> input = query;
      input.insert(input.end(), ids.begin() + win.start, ids.begin() + win.end + 1);
      ad::Var enc = encoder_.build(tape, input, train_mode, dropout_rng);
      doc_parts.push_back(ad::slice_rows(enc, qlen, win.length()));
    }
    return average_windows(tape, doc_parts, plan);
  }

  FieldSchema schema_;
  Vocabulary vocab_;
  PairwiseModelConfig cfg_;
  ToyTransformerEncoder encoder_;
  ad::Param start_proj_, end_proj_;
  std::vector<std::vector<int>> query_ids_;
};

}  // namespace spanie
