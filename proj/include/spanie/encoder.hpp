#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spanie/autodiff.hpp"
#include "spanie/rng.hpp"

namespace spanie {

// Anything that turns a token-id sequence into one contextual vector per
// token. Every invocation is counted, so tests and benchmarks can assert how
// many encoding passes a model really issues.
class ContextualEncoder {
 public:
  ContextualEncoder() = default;
  // the atomic counter is not movable; carry its value across copies/moves
  ContextualEncoder(const ContextualEncoder& other) : calls_(other.call_count()) {}
  ContextualEncoder& operator=(const ContextualEncoder& other) {
    calls_.store(other.call_count(), std::memory_order_relaxed);
    return *this;
  }
  virtual ~ContextualEncoder() = default;

  virtual int output_dim() const = 0;
  virtual int max_input_length() const = 0;

  Mat encode(std::span<const int> ids, bool train_mode = false) {
    record_call();
    return do_encode(ids, train_mode);
  }

  long long call_count() const { return calls_.load(std::memory_order_relaxed); }
  void reset_call_count() { calls_.store(0, std::memory_order_relaxed); }

 protected:
  virtual Mat do_encode(std::span<const int> ids, bool train_mode) = 0;
  void record_call() { calls_.fetch_add(1, std::memory_order_relaxed); }

 private:
  std::atomic<long long> calls_{0};
};

// An encoder that can also emit its computation onto an autodiff tape, which
// is what training uses.
class GraphEncoder : public ContextualEncoder {
 public:
  virtual ad::Var build(ad::Tape& tape, std::span<const int> ids, bool train_mode,
                        Rng* dropout_rng) = 0;
};

struct ToyTransformerConfig {
  int vocab_size = 0;
  int embed_dim = 64;
  int num_layers = 2;
  int num_heads = 4;
  int feedforward_dim = 256;
  int max_position = 384;
  double dropout = 0.0;
  std::uint64_t parameter_init_seed = 1;

  void validate() const {
    if (vocab_size < 1) throw ConfigError("encoder: vocab_size must be >= 1");
    if (embed_dim < 1 || num_layers < 1 || num_heads < 1 || feedforward_dim < 1 ||
        max_position < 1)
      throw ConfigError("encoder: all dimensions must be >= 1");
    if (embed_dim % num_heads != 0)
      throw ConfigError("encoder: embed_dim " + std::to_string(embed_dim) +
                        " not divisible by num_heads " + std::to_string(num_heads));
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder: dropout must be in [0,1)");
  }
};

// Small trainable pre-norm transformer encoder: learned token + position
// embeddings, multi-head self-attention, GELU feed-forward, final layer norm.
// Stands in for a pretrained encoder at desk scale.
class ToyTransformerEncoder : public GraphEncoder {
 public:
  struct LayerParams {
    ad::Param wq, bq, wk, bk, wv, bv, wo, bo;
    ad::Param ln1_gain, ln1_bias;
    ad::Param ff_w1, ff_b1, ff_w2, ff_b2;
    ad::Param ln2_gain, ln2_bias;
  };

  explicit ToyTransformerEncoder(ToyTransformerConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.parameter_init_seed);
    const int c = cfg_.embed_dim, f = cfg_.feedforward_dim;
    tok_embedding_ = ad::Param("encoder.tok_embedding", cfg_.vocab_size, c);
    pos_embedding_ = ad::Param("encoder.pos_embedding", cfg_.max_position, c);
    init_normal(tok_embedding_, rng, kInitStd);
    init_normal(pos_embedding_, rng, kInitStd);
    layers_.reserve(cfg_.num_layers);
    for (int l = 0; l < cfg_.num_layers; ++l) {
      const std::string base = "encoder.layer" + std::to_string(l) + ".";
      LayerParams lp{
          ad::Param(base + "attn.wq", c, c), ad::Param(base + "attn.bq", 1, c),
          ad::Param(base + "attn.wk", c, c), ad::Param(base + "attn.bk", 1, c),
          ad::Param(base + "attn.wv", c, c), ad::Param(base + "attn.bv", 1, c),
          ad::Param(base + "attn.wo", c, c), ad::Param(base + "attn.bo", 1, c),
          ad::Param(base + "ln1.gain", 1, c), ad::Param(base + "ln1.bias", 1, c),
          ad::Param(base + "ffn.w1", c, f),  ad::Param(base + "ffn.b1", 1, f),
          ad::Param(base + "ffn.w2", f, c),  ad::Param(base + "ffn.b2", 1, c),
          ad::Param(base + "ln2.gain", 1, c), ad::Param(base + "ln2.bias", 1, c)};
      init_normal(lp.wq, rng, kInitStd);
      init_normal(lp.wk, rng, kInitStd);
      init_normal(lp.wv, rng, kInitStd);
      init_normal(lp.wo, rng, kInitStd);
      init_normal(lp.ff_w1, rng, kInitStd);
      init_normal(lp.ff_w2, rng, kInitStd);
      init_constant(lp.ln1_gain, 1.0);
      init_constant(lp.ln2_gain, 1.0);
      layers_.push_back(std::move(lp));
    }
    ln_out_gain_ = ad::Param("encoder.ln_out.gain", 1, c);
    ln_out_bias_ = ad::Param("encoder.ln_out.bias", 1, c);
    init_constant(ln_out_gain_, 1.0);
    dropout_rng_.seed(cfg_.parameter_init_seed ^ 0x9e3779b97f4a7c15ull);
  }

  int output_dim() const override { return cfg_.embed_dim; }
  int max_input_length() const override { return cfg_.max_position; }
  const ToyTransformerConfig& config() const { return cfg_; }

  ad::Var build(ad::Tape& tape, std::span<const int> ids, bool train_mode,
                Rng* dropout_rng) override {
    record_call();
    return build_impl(tape, ids, train_mode, dropout_rng);
  }

 protected:
  Mat do_encode(std::span<const int> ids, bool train_mode) override {
    ad::Tape tape;
    return tape.value(build_impl(tape, ids, train_mode, nullptr));
  }

 private:
  ad::Var build_impl(ad::Tape& tape, std::span<const int> ids, bool train_mode,
                     Rng* dropout_rng) {
    check_input(ids);
    const int k = static_cast<int>(ids.size());
    const int heads = cfg_.num_heads;
    const int head_dim = cfg_.embed_dim / heads;
    const bool drop = train_mode && cfg_.dropout > 0.0;
    Rng* rng = dropout_rng != nullptr ? dropout_rng : &dropout_rng_;

    std::vector<int> positions(k);
    for (int i = 0; i < k; ++i) positions[i] = i;

    ad::Var tok = ad::gather_rows(tape.param(tok_embedding_), {ids.begin(), ids.end()});
    ad::Var pos = ad::gather_rows(tape.param(pos_embedding_), positions);
    ad::Var x = ad::add(tok, pos);
    if (drop) x = ad::dropout(x, cfg_.dropout, *rng);

    const double attn_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
    for (auto& lp : layers_) {
      ad::Var h = ad::layer_norm_rows(x, tape.param(lp.ln1_gain), tape.param(lp.ln1_bias));
      ad::Var q = ad::add_rowwise(ad::matmul(h, tape.param(lp.wq)), tape.param(lp.bq));
      ad::Var key = ad::add_rowwise(ad::matmul(h, tape.param(lp.wk)), tape.param(lp.bk));
      ad::Var val = ad::add_rowwise(ad::matmul(h, tape.param(lp.wv)), tape.param(lp.bv));
      std::vector<ad::Var> head_ctx;
      head_ctx.reserve(heads);
      for (int hd = 0; hd < heads; ++hd) {
        ad::Var qh = ad::slice_cols(q, hd * head_dim, head_dim);
        ad::Var kh = ad::slice_cols(key, hd * head_dim, head_dim);
        ad::Var vh = ad::slice_cols(val, hd * head_dim, head_dim);
        ad::Var scores = ad::scale(ad::matmul_bt(qh, kh), attn_scale);
        ad::Var weights = ad::softmax_rows(scores);
        head_ctx.push_back(ad::matmul(weights, vh));
      }
      ad::Var ctx = heads == 1 ? head_ctx.front() : ad::concat_cols(head_ctx);
      ad::Var attn_out = ad::add_rowwise(ad::matmul(ctx, tape.param(lp.wo)), tape.param(lp.bo));
      if (drop) attn_out = ad::dropout(attn_out, cfg_.dropout, *rng);
      x = ad::add(x, attn_out);

      ad::Var h2 = ad::layer_norm_rows(x, tape.param(lp.ln2_gain), tape.param(lp.ln2_bias));
      ad::Var ff = ad::add_rowwise(ad::matmul(h2, tape.param(lp.ff_w1)), tape.param(lp.ff_b1));
      ff = ad::gelu(ff);
      ff = ad::add_rowwise(ad::matmul(ff, tape.param(lp.ff_w2)), tape.param(lp.ff_b2));
      if (drop) ff = ad::dropout(ff, cfg_.dropout, *rng);
      x = ad::add(x, ff);
    }
    return ad::layer_norm_rows(x, tape.param(ln_out_gain_), tape.param(ln_out_bias_));
  }

 public:
  std::vector<ad::Param*> parameters() {
    std::vector<ad::Param*> out{&tok_embedding_, &pos_embedding_};
    for (auto& lp : layers_) {
      out.insert(out.end(), {&lp.wq, &lp.bq, &lp.wk, &lp.bk, &lp.wv, &lp.bv, &lp.wo, &lp.bo,
                             &lp.ln1_gain, &lp.ln1_bias, &lp.ff_w1, &lp.ff_b1, &lp.ff_w2,
                             &lp.ff_b2, &lp.ln2_gain, &lp.ln2_bias});
    }
    out.push_back(&ln_out_gain_);
    out.push_back(&ln_out_bias_);
    return out;
  }

 private:
  static constexpr double kInitStd = 0.02;

  void check_input(std::span<const int> ids) const {
    const int k = static_cast<int>(ids.size());
    if (k < 1) throw ValidationError("encoder: empty input");
    if (k > cfg_.max_position)
      throw ValidationError("encoder: input length " + std::to_string(k) +
                            " exceeds max input length " + std::to_string(cfg_.max_position) +
                            "; split the document into windows first");
    for (int id : ids)
      if (id < 0 || id >= cfg_.vocab_size)
        throw ValidationError("encoder: token id " + std::to_string(id) +
                              " outside vocabulary of size " + std::to_string(cfg_.vocab_size));
  }

  ToyTransformerConfig cfg_;
  ad::Param tok_embedding_, pos_embedding_;
  std::vector<LayerParams> layers_;
  ad::Param ln_out_gain_, ln_out_bias_;
  Rng dropout_rng_;
};

}  // namespace spanie
