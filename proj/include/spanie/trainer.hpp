#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spanie/adam.hpp"
#include "spanie/inference.hpp"
#include "spanie/losses.hpp"
#include "spanie/metrics.hpp"
#include "spanie/rng.hpp"
#include "spanie/types.hpp"

namespace spanie {

struct TrainingConfig {
  int epochs = 20;
  int batch_size = 16;
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  LossMode loss_mode = LossMode::kSum;
  double alpha_init = 0.5;
  std::uint64_t seed = 42;
  int window_length = 384;
  int stride = 128;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
    if (alpha_init <= 0.0 || alpha_init >= 1.0)
      throw ConfigError("alpha_init must lie strictly in (0,1)");
  }
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double span_loss = 0.0;
  double ner_loss = 0.0;
  double alpha = 0.5;
  double dev_squad_f1 = 0.0;
  double dev_conll_f1 = 0.0;
  bool has_dev = false;
  double epoch_seconds = 0.0;

  nlohmann::json to_json() const {
    return {{"epoch", epoch},
            {"L", loss},
            {"L_span", span_loss},
            {"L_NER", ner_loss},
            {"alpha", alpha},
            {"dev_squad_f1", has_dev ? nlohmann::json(dev_squad_f1) : nlohmann::json(nullptr)},
            {"dev_conll_f1", has_dev ? nlohmann::json(dev_conll_f1) : nlohmann::json(nullptr)},
            {"epoch_seconds", epoch_seconds}};
  }
};

struct TrainPaths {
  std::filesystem::path metrics_jsonl;    // append-only JSON lines, one per epoch
  std::filesystem::path best_checkpoint;  // written whenever the dev score improves
  std::filesystem::path final_checkpoint;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_dev_score = -1.0;
};

// Stops training early when it returns true; receives each finished epoch.
using StopCondition = std::function<bool(const EpochRecord&)>;

// Mini-batch training loop shared by the joint model and the pairwise
// baseline. One document never spans two batches; gradients are averaged over
// the batch and applied with Adam. Per-epoch records carry the mean losses,
// the current span weight, dev metrics, and the optimisation wall time.
template <typename Model>
TrainResult train_model(Model& model, const TrainingConfig& cfg,
                        const std::vector<LabeledExample>& train_set,
                        const std::vector<LabeledExample>& dev_set, const TrainPaths& paths = {},
                        const StopCondition& stop_when = {}) {
  cfg.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");
  for (const auto& ex : train_set) validate_example(ex, model.schema());

  Adam optimizer(model.parameters(),
                 AdamConfig{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps});
  Rng shuffle_rng(cfg.seed);
  Rng dropout_rng(cfg.seed ^ 0xd70b0f1ull);

  std::ofstream metrics_out;
  if (!paths.metrics_jsonl.empty()) {
    metrics_out.open(paths.metrics_jsonl, std::ios::binary | std::ios::app);
    if (!metrics_out)
      throw ConfigError("cannot open metrics log '" + paths.metrics_jsonl.string() + "'");
  }

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng_shuffle(shuffle_rng, order);
    double sum_loss = 0.0, sum_span = 0.0, sum_ner = 0.0, alpha = 0.5;
    long batch_id = 0;
    for (std::size_t at = 0; at < order.size(); at += cfg.batch_size, ++batch_id) {
      const std::size_t batch_end = std::min(order.size(), at + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(batch_end - at);
      for (std::size_t k = at; k < batch_end; ++k) {
        const LabeledExample& ex = train_set[order[k]];
        ad::Tape tape;
        const auto losses = model.build_training_graph(tape, ex, cfg.loss_mode, true, &dropout_rng);
        const double loss = losses.total.scalar();
        const double span = losses.span.scalar();
        const double ner = losses.ner.scalar();
        if (!std::isfinite(loss))
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch_id) + ", doc '" + ex.document.doc_id +
                              "' (L_span=" + std::to_string(span) +
                              ", L_NER=" + std::to_string(ner) + ")");
        sum_loss += loss;
        sum_span += span;
        sum_ner += ner;
        alpha = losses.alpha;
        tape.backward(losses.total, inv_batch);
      }
      optimizer.step();
    }
    const auto t1 = std::chrono::steady_clock::now();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = sum_loss / train_set.size();
    rec.span_loss = sum_span / train_set.size();
    rec.ner_loss = sum_ner / train_set.size();
    rec.alpha = alpha;
    rec.epoch_seconds = std::chrono::duration<double>(t1 - t0).count();

    if (!dev_set.empty()) {
      rec.has_dev = true;
      const auto preds = predict_documents(model, documents_of(dev_set), 1);
      rec.dev_squad_f1 = squad_f1(preds, dev_set, model.schema().size());
      rec.dev_conll_f1 = conll_f1(preds, dev_set, model.schema().size()).micro_f1;
      const double score = 0.5 * (rec.dev_squad_f1 + rec.dev_conll_f1);
      if (score > result.best_dev_score) {
        result.best_dev_score = score;
        result.best_epoch = epoch;
        if (!paths.best_checkpoint.empty()) model.save_checkpoint(paths.best_checkpoint);
      }
    }

    if (metrics_out.is_open()) metrics_out << rec.to_json().dump() << "\n" << std::flush;
    result.history.push_back(rec);
    if (stop_when && stop_when(rec)) break;
  }

  if (!paths.final_checkpoint.empty()) model.save_checkpoint(paths.final_checkpoint);
  if (result.best_epoch < 0) {
    // no dev set: the final state doubles as the best one
    result.best_epoch = result.history.empty() ? 0 : result.history.back().epoch;
    if (!paths.best_checkpoint.empty()) model.save_checkpoint(paths.best_checkpoint);
  }
  return result;
}

}  // namespace spanie
