#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spanie/bench.hpp"
#include "spanie/config.hpp"
#include "spanie/dataset.hpp"
#include "spanie/inference.hpp"
#include "spanie/joint_model.hpp"
#include "spanie/manifest.hpp"
#include "spanie/metrics.hpp"
#include "spanie/pairwise_model.hpp"
#include "spanie/predictions_io.hpp"
#include "spanie/synthetic.hpp"
#include "spanie/trainer.hpp"
#include "spanie/version.hpp"

namespace spanie::cli {

// Exit codes: 0 ok, 2 configuration, 3 data validation/format, 4 runtime.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitRuntime = 4;

namespace detail {

struct CommonModelArgs {
  std::string config_file;
  std::vector<std::string> overrides;  // key=value pairs from --set

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_file.empty()) load_config_file(cfg, config_file);
    for (const auto& kv : overrides) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + kv + "'");
      apply_config_key(cfg, spanie::detail::trim(kv.substr(0, eq)),
                       spanie::detail::trim(kv.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
  }
};

inline nlohmann::json corpus_stats_json(const FieldSchema& schema,
                                        const std::vector<LabeledExample>& examples) {
  long answered = 0, multi = 0, spans = 0, tokens = 0, answer_tokens = 0;
  for (const auto& ex : examples) {
    tokens += ex.document.size();
    for (const auto& ann : ex.annotations) {
      if (ann.spans.empty()) continue;
      ++answered;
      if (ann.spans.size() >= 2) ++multi;
      spans += static_cast<long>(ann.spans.size());
      for (const auto& s : ann.spans) answer_tokens += s.length();
    }
  }
  return {{"documents", examples.size()},
          {"fields", schema.size()},
          {"total_spans", spans},
          {"answered_fields", answered},
          {"multispan_fields", multi},
          {"multispan_fraction", answered == 0 ? 0.0 : double(multi) / answered},
          {"answer_token_fraction", tokens == 0 ? 0.0 : double(answer_tokens) / tokens},
          {"avg_length", examples.empty() ? 0.0 : double(tokens) / examples.size()}};
}

inline JointModelConfig joint_config(const RunConfig& cfg) {
  JointModelConfig jcfg;
  jcfg.encoder = cfg.encoder;
  jcfg.encoder.parameter_init_seed = cfg.training.seed;
  jcfg.window_length = cfg.training.window_length;
  jcfg.stride = cfg.training.stride;
  jcfg.span_depth = cfg.span_depth;
  jcfg.alpha_init = cfg.training.alpha_init;
  return jcfg;
}

inline PairwiseModelConfig pairwise_config(const RunConfig& cfg) {
  PairwiseModelConfig pcfg;
  pcfg.encoder = cfg.encoder;
  pcfg.encoder.parameter_init_seed = cfg.training.seed;
  pcfg.window_length = cfg.training.window_length;
  pcfg.stride = cfg.training.stride;
  return pcfg;
}

inline int cmd_ingest(const std::string& data_path) {
  Dataset ds = load_dataset(data_path);
  const nlohmann::json stats = corpus_stats_json(ds.schema, ds.examples);
  std::cout << "dataset: " << data_path << "\n"
            << "valid: yes\n"
            << stats.dump(2) << "\n";
  return kExitOk;
}

inline int cmd_gen_synthetic(const SyntheticSpec& spec, const std::string& out_path) {
  SyntheticCorpus corpus = generate_synthetic_corpus(spec);
  save_dataset(out_path, corpus.schema, corpus.examples);

  RunManifest manifest;
  manifest.command = "gen-synthetic";
  manifest.seed = spec.seed;
  manifest.config_echo = {{"size", spec.size},
                          {"m", spec.num_fields},
                          {"multispan_rate", spec.multispan_rate},
                          {"no_answer_rate", spec.no_answer_rate},
                          {"min_length", spec.min_length},
                          {"max_length", spec.max_length}};
  manifest.dataset_hashes[out_path] = hash_file(out_path);
  manifest.stats = {{"documents", corpus.stats.documents},
                    {"fields", corpus.stats.fields},
                    {"total_spans", corpus.stats.total_spans},
                    {"multispan_fraction", corpus.stats.multispan_fraction()},
                    {"answer_token_fraction", corpus.stats.answer_token_fraction()},
                    {"avg_length", corpus.stats.avg_length}};
  manifest.outputs = {out_path};
  write_manifest(out_path + ".manifest.json", manifest);
  std::cout << "wrote " << out_path << " (" << corpus.stats.documents << " docs, m="
            << corpus.stats.fields << ", multi-span fraction "
            << corpus.stats.multispan_fraction() << ")\n";
  return kExitOk;
}

template <typename Model>
int train_and_report(Model& model, const RunConfig& cfg,
                     const std::vector<LabeledExample>& train_set,
                     const std::vector<LabeledExample>& dev_set,
                     const std::filesystem::path& out_dir) {
  TrainPaths paths{out_dir / "metrics.jsonl", out_dir / "checkpoint_best.spck",
                   out_dir / "checkpoint_final.spck"};
  TrainResult result = train_model(model, cfg.training, train_set, dev_set, paths);
  const EpochRecord& last = result.history.back();
  std::cout << "trained " << result.history.size() << " epochs; final L=" << last.loss
            << " (span " << last.span_loss << ", ner " << last.ner_loss << ")";
  if (last.has_dev)
    std::cout << "; dev squad_f1=" << last.dev_squad_f1 << ", conll_f1=" << last.dev_conll_f1
              << "; best epoch " << result.best_epoch;
  std::cout << "\n";
  return kExitOk;
}

inline int cmd_train(const CommonModelArgs& common, const std::string& data_path,
                     const std::string& dev_path, const std::string& out_dir_str) {
  RunConfig cfg = common.resolve();
  Dataset train_ds = load_dataset(data_path);
  std::vector<LabeledExample> dev_set;
  if (!dev_path.empty()) dev_set = load_dataset(dev_path, train_ds.schema);

  // inputs are valid; only now start touching the output directory
  const std::filesystem::path out_dir(out_dir_str);
  std::filesystem::create_directories(out_dir);

  const Vocabulary vocab = Vocabulary::build(documents_of(train_ds.examples), cfg.min_count);

  RunManifest manifest;
  manifest.command = "train";
  manifest.seed = cfg.training.seed;
  manifest.config_echo = cfg.to_json();
  manifest.dataset_hashes[data_path] = hash_file(data_path);
  if (!dev_path.empty()) manifest.dataset_hashes[dev_path] = hash_file(dev_path);
  manifest.stats = corpus_stats_json(train_ds.schema, train_ds.examples);
  manifest.stats["vocabulary_size"] = vocab.size();
  manifest.outputs = {(out_dir / "metrics.jsonl").string(),
                      (out_dir / "checkpoint_best.spck").string(),
                      (out_dir / "checkpoint_final.spck").string()};

  // stale logs from a previous run in the same directory would otherwise grow
  std::filesystem::remove(out_dir / "metrics.jsonl");

  int status;
  if (cfg.model == "joint") {
    JointModel model(train_ds.schema, vocab, joint_config(cfg));
    status = train_and_report(model, cfg, train_ds.examples, dev_set, out_dir);
  } else {
    PairwiseModel model(train_ds.schema, vocab, pairwise_config(cfg));
    status = train_and_report(model, cfg, train_ds.examples, dev_set, out_dir);
  }
  write_manifest(out_dir / "manifest.json", manifest);
  return status;
}

inline int cmd_predict(const std::string& checkpoint_path, const std::string& data_path,
                       const std::string& out_path, int workers) {
  const LoadedCheckpoint peek = load_checkpoint_file(checkpoint_path);
  Dataset ds = load_dataset(data_path);
  if (peek.header.schema_names != ds.schema.names())
    throw ValidationError("checkpoint schema (m=" + std::to_string(peek.header.schema_names.size()) +
                          ") does not match dataset schema (m=" + std::to_string(ds.schema.size()) +
                          ")");
  const std::vector<Document> docs = documents_of(ds.examples);
  std::vector<DocumentPrediction> preds;
  if (peek.header.model_type == "joint") {
    JointModel model = JointModel::load_checkpoint(checkpoint_path);
    preds = predict_documents(model, docs, workers);
  } else {
    PairwiseModel model = PairwiseModel::load_checkpoint(checkpoint_path);
    preds = predict_documents(model, docs, workers);
  }
  write_predictions(out_path, preds, docs, ds.schema);

  RunManifest manifest;
  manifest.command = "predict";
  manifest.config_echo = {{"checkpoint", checkpoint_path}, {"workers", workers}};
  manifest.dataset_hashes[data_path] = hash_file(data_path);
  manifest.dataset_hashes[checkpoint_path] = hash_file(checkpoint_path);
  manifest.outputs = {out_path};
  write_manifest(out_path + ".manifest.json", manifest);
  std::cout << "wrote " << preds.size() << " prediction records to " << out_path << "\n";
  return kExitOk;
}

inline int cmd_eval(const std::string& pred_path, const std::string& data_path,
                    const std::string& out_path, bool multispan_all) {
  Dataset ds = load_dataset(data_path);
  std::vector<DocumentPrediction> preds = read_predictions(pred_path, ds.schema);
  MetricReport report =
      evaluate_predictions(preds, ds.examples, ds.schema, multispan_all ? 1 : 2);
  std::cout << metric_report_table(report, ds.schema);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + out_path + "'");
    out << metric_report_to_json(report, ds.schema).dump(2) << "\n";

    RunManifest manifest;
    manifest.command = "eval";
    manifest.config_echo = {{"predictions", pred_path}, {"multispan_all", multispan_all}};
    manifest.dataset_hashes[data_path] = hash_file(data_path);
    manifest.dataset_hashes[pred_path] = hash_file(pred_path);
    manifest.outputs = {out_path};
    write_manifest(out_path + ".manifest.json", manifest);
  }
  return kExitOk;
}

inline int cmd_bench(const CommonModelArgs& common, const SyntheticSpec& spec,
                     const std::string& out_path, bool no_train) {
  RunConfig cfg = common.resolve();
  SyntheticCorpus corpus = generate_synthetic_corpus(spec);
  std::vector<BenchRow> rows = run_benchmark(corpus.schema, corpus.examples, cfg, !no_train);
  write_bench_csv(out_path, rows);
  std::cout << bench_csv(rows);

  RunManifest manifest;
  manifest.command = "bench";
  manifest.seed = spec.seed;
  manifest.config_echo = cfg.to_json();
  manifest.config_echo["corpus"] = {{"size", spec.size},
                                    {"m", spec.num_fields},
                                    {"min_length", spec.min_length},
                                    {"max_length", spec.max_length},
                                    {"seed", spec.seed}};
  manifest.stats = {{"multispan_fraction", corpus.stats.multispan_fraction()},
                    {"avg_length", corpus.stats.avg_length}};
  manifest.outputs = {out_path};
  write_manifest(out_path + ".manifest.json", manifest);
  return kExitOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
  CLI::App app{"spanie: joint span-extraction + sequence-labeling information extraction"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  int exit_code = kExitOk;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load and validate a dataset file");
  auto ingest_data = std::make_shared<std::string>();
  ingest->add_option("--data", *ingest_data, "dataset JSON file")->required();
  bool ingest_validate = false;
  ingest->add_flag("--validate", ingest_validate, "validate only (default behaviour)");
  ingest->callback([=, &exit_code]() { exit_code = detail::cmd_ingest(*ingest_data); });

  // shared model/config options
  auto add_common = [](CLI::App* sub, std::shared_ptr<detail::CommonModelArgs> common) {
    sub->add_option("--config", common->config_file, "key=value config file");
    sub->add_option("--set", common->overrides,
                    "config override key=value (repeatable; highest precedence)");
  };

  // train
  auto* train = app.add_subcommand("train", "Train a model and write checkpoints");
  auto train_common = std::make_shared<detail::CommonModelArgs>();
  auto train_data = std::make_shared<std::string>();
  auto train_dev = std::make_shared<std::string>();
  auto train_out = std::make_shared<std::string>();
  add_common(train, train_common);
  train->add_option("--data", *train_data, "training dataset JSON")->required();
  train->add_option("--dev", *train_dev, "development dataset JSON");
  train->add_option("--out", *train_out, "output directory")->required();
  for (const char* key : {"model", "epochs", "batch_size", "learning_rate", "loss_mode", "seed",
                          "window_length", "stride", "workers"}) {
    // common keys also exposed as first-class flags
    train->add_option_function<std::string>(
        "--" + std::string(key),
        [train_common, key = std::string(key)](const std::string& v) {
          train_common->overrides.push_back(key + "=" + v);
        },
        "same as --set " + std::string(key) + "=...");
  }
  train->callback([=, &exit_code]() {
    exit_code = detail::cmd_train(*train_common, *train_data, *train_dev, *train_out);
  });

  // predict
  auto* predict = app.add_subcommand("predict", "Run a checkpoint over a dataset");
  auto pred_ckpt = std::make_shared<std::string>();
  auto pred_data = std::make_shared<std::string>();
  auto pred_out = std::make_shared<std::string>();
  auto pred_workers = std::make_shared<int>(1);
  predict->add_option("--checkpoint", *pred_ckpt, "model checkpoint")->required();
  predict->add_option("--data", *pred_data, "dataset JSON")->required();
  predict->add_option("--out", *pred_out, "prediction JSON output")->required();
  predict->add_option("--workers", *pred_workers, "worker threads for inference");
  predict->callback([=, &exit_code]() {
    exit_code = detail::cmd_predict(*pred_ckpt, *pred_data, *pred_out, *pred_workers);
  });

  // eval
  auto* eval = app.add_subcommand("eval", "Score a prediction file against gold annotations");
  auto eval_pred = std::make_shared<std::string>();
  auto eval_data = std::make_shared<std::string>();
  auto eval_out = std::make_shared<std::string>();
  auto eval_all = std::make_shared<bool>(false);
  eval->add_option("--pred", *eval_pred, "prediction JSON")->required();
  eval->add_option("--data", *eval_data, "dataset JSON with gold annotations")->required();
  eval->add_option("--out", *eval_out, "metric report JSON output");
  eval->add_flag("--multispan-all", *eval_all,
                 "compute multi-span recall over all answered fields, not only multi-span ones");
  eval->callback([=, &exit_code]() {
    exit_code = detail::cmd_eval(*eval_pred, *eval_data, *eval_out, *eval_all);
  });

  // bench
  auto* bench = app.add_subcommand(
      "bench", "Time the joint model against the pairwise baseline on a synthetic corpus");
  auto bench_common = std::make_shared<detail::CommonModelArgs>();
  auto bench_spec = std::make_shared<SyntheticSpec>();
  bench_spec->size = 8;
  bench_spec->num_fields = 8;
  auto bench_out = std::make_shared<std::string>();
  auto bench_no_train = std::make_shared<bool>(false);
  add_common(bench, bench_common);
  bench->add_option("--out", *bench_out, "timing CSV output")->required();
  bench->add_option("--docs", bench_spec->size, "corpus size");
  bench->add_option("--m", bench_spec->num_fields, "number of fields");
  bench->add_option("--min-length", bench_spec->min_length, "min document length");
  bench->add_option("--max-length", bench_spec->max_length, "max document length");
  bench->add_option("--corpus-seed", bench_spec->seed, "corpus seed");
  bench->add_flag("--no-train", *bench_no_train, "skip the train-epoch phase");
  bench->callback([=, &exit_code]() {
    exit_code = detail::cmd_bench(*bench_common, *bench_spec, *bench_out, *bench_no_train);
  });

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a seeded synthetic dataset");
  auto gen_spec = std::make_shared<SyntheticSpec>();
  auto gen_out = std::make_shared<std::string>();
  gen->add_option("--out", *gen_out, "dataset JSON output")->required();
  gen->add_option("--size", gen_spec->size, "number of documents");
  gen->add_option("--m", gen_spec->num_fields, "number of fields");
  gen->add_option("--seed", gen_spec->seed, "generator seed");
  gen->add_option("--multispan-rate", gen_spec->multispan_rate,
                  "probability an answered field carries several spans");
  gen->add_option("--no-answer-rate", gen_spec->no_answer_rate,
                  "probability a field has no answer in a document");
  gen->add_option("--min-length", gen_spec->min_length, "min document length");
  gen->add_option("--max-length", gen_spec->max_length, "max document length");
  gen->add_option("--doc-id-prefix", gen_spec->doc_id_prefix, "document id prefix");
  gen->callback([=, &exit_code]() { exit_code = detail::cmd_gen_synthetic(*gen_spec, *gen_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitData;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitData;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return exit_code;
}

}  // namespace spanie::cli
