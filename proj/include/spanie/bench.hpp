#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spanie/config.hpp"
#include "spanie/inference.hpp"
#include "spanie/joint_model.hpp"
#include "spanie/pairwise_model.hpp"
#include "spanie/trainer.hpp"

namespace spanie {

struct BenchRow {
  std::string model;
  std::string phase;  // train_epoch | inference | inference_parallel
  int documents = 0;
  int m = 0;
  double seconds = 0.0;
  long long encoder_calls = 0;
};

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "model,phase,documents,m,seconds,encoder_calls\n";
  for (const auto& r : rows)
    out << r.model << ',' << r.phase << ',' << r.documents << ',' << r.m << ',' << r.seconds
        << ',' << r.encoder_calls << '\n';
  return out.str();
}

inline void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << bench_csv(rows);
}

namespace detail {

template <typename Model, typename Fn>
BenchRow timed_phase(Model& model, const std::string& name, const std::string& phase,
                     int documents, int m, Fn&& fn) {
  model.encoder().reset_call_count();
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return BenchRow{name, phase, documents, m, std::chrono::duration<double>(t1 - t0).count(),
                  model.encoder().call_count()};
}

template <typename Model>
void bench_one_model(Model& model, const std::string& name,
                     const std::vector<LabeledExample>& examples, const TrainingConfig& training,
                     bool include_train, int workers, std::vector<BenchRow>& rows) {
  const int docs = static_cast<int>(examples.size());
  const int m = model.schema().size();
  if (include_train) {
    TrainingConfig one_epoch = training;
    one_epoch.epochs = 1;
    rows.push_back(timed_phase(model, name, "train_epoch", docs, m,
                               [&] { train_model(model, one_epoch, examples, {}); }));
  }
  const std::vector<Document> doc_list = documents_of(examples);
  rows.push_back(timed_phase(model, name, "inference", docs, m,
                             [&] { predict_documents(model, doc_list, 1); }));
  if (workers > 1)
    rows.push_back(timed_phase(model, name, "inference_parallel", docs, m,
                               [&] { predict_documents(model, doc_list, workers); }));
}

}  // namespace detail

// Times one training epoch and one full inference pass for the joint model
// and the pairwise baseline on the same corpus, with encoder-invocation
// counts. Single-worker inference is the honest comparison; a parallel row is
// added when workers > 1.
inline std::vector<BenchRow> run_benchmark(const FieldSchema& schema,
                                           const std::vector<LabeledExample>& examples,
                                           const RunConfig& cfg, bool include_train = true) {
  if (examples.empty()) throw ValidationError("benchmark corpus is empty");
  std::vector<Document> docs = documents_of(examples);
  const Vocabulary vocab = Vocabulary::build(docs, cfg.min_count);

  std::vector<BenchRow> rows;
  {
    JointModelConfig jcfg;
    jcfg.encoder = cfg.encoder;
    jcfg.encoder.parameter_init_seed = cfg.training.seed;
    jcfg.window_length = cfg.training.window_length;
    jcfg.stride = cfg.training.stride;
    jcfg.span_depth = cfg.span_depth;
    JointModel joint(schema, vocab, jcfg);
    detail::bench_one_model(joint, "joint", examples, cfg.training, include_train, cfg.workers,
                            rows);
  }
  {
    PairwiseModelConfig pcfg;
    pcfg.encoder = cfg.encoder;
    pcfg.encoder.parameter_init_seed = cfg.training.seed;
    pcfg.window_length = cfg.training.window_length;
    pcfg.stride = cfg.training.stride;
    PairwiseModel pairwise(schema, vocab, pcfg);
    detail::bench_one_model(pairwise, "pairwise", examples, cfg.training, include_train,
                            cfg.workers, rows);
  }
  return rows;
}

}  // namespace spanie
