#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spanie/cli.hpp"

using namespace spanie;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"spanie"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("spanie_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const std::vector<std::string> kTinyModel = {
    "--set", "window_length=32",          "--set", "stride=16",
    "--set", "encoder.embed_dim=16",      "--set", "encoder.num_layers=1",
    "--set", "encoder.num_heads=2",       "--set", "encoder.feedforward_dim=24",
};

}  // namespace

TEST_CASE("cli gen-synthetic is reproducible and writes a manifest") {
  TempDir tmp;
  const auto args = std::vector<std::string>{
      "gen-synthetic", "--out", tmp / "a.json", "--size", "5", "--m", "2",
      "--seed", "42", "--min-length", "40", "--max-length", "60"};
  REQUIRE(run_cli(args) == 0);
  auto again = args;
  again[2] = tmp / "b.json";
  REQUIRE(run_cli(again) == 0);
  REQUIRE(slurp(tmp / "a.json") == slurp(tmp / "b.json"));
  const auto manifest = nlohmann::json::parse(slurp(tmp / "a.json.manifest.json"));
  REQUIRE(manifest["command"] == "gen-synthetic");
  REQUIRE(manifest["stats"].contains("multispan_fraction"));
  REQUIRE(manifest["stats"].contains("answer_token_fraction"));
}

TEST_CASE("cli ingest validates and reports stats") {
  TempDir tmp;
  REQUIRE(run_cli({"gen-synthetic", "--out", tmp / "d.json", "--size", "3", "--m", "2",
                   "--min-length", "40", "--max-length", "50"}) == 0);
  REQUIRE(run_cli({"ingest", "--data", tmp / "d.json", "--validate"}) == 0);
}

TEST_CASE("cli exit codes: config vs data errors") {
  TempDir tmp;
  REQUIRE(run_cli({"ingest", "--data", tmp / "missing.json"}) == cli::kExitConfig);
  std::ofstream(tmp / "corrupt.json") << "{ not json";
  REQUIRE(run_cli({"ingest", "--data", tmp / "corrupt.json"}) == cli::kExitData);
  std::ofstream(tmp / "badspan.json") << R"({
    "schema": {"fields": [{"name": "a"}]},
    "examples": [{"doc_id": "d", "tokens": ["x"],
                  "annotations": [{"field": "a", "spans": [[0, 5]]}]}]})";
  REQUIRE(run_cli({"ingest", "--data", tmp / "badspan.json"}) == cli::kExitData);
  REQUIRE(run_cli({"train", "--out", tmp / "out"}) == cli::kExitConfig);  // missing --data
  REQUIRE(run_cli({"no-such-command"}) == cli::kExitConfig);
}

TEST_CASE("cli train, predict twice byte-identically, then eval") {
  TempDir tmp;
  REQUIRE(run_cli({"gen-synthetic", "--out", tmp / "train.json", "--size", "6", "--m", "2",
                   "--seed", "3", "--min-length", "40", "--max-length", "60"}) == 0);

  std::vector<std::string> train_args{"train",
                                      "--data",
                                      tmp / "train.json",
                                      "--dev",
                                      tmp / "train.json",
                                      "--out",
                                      tmp / "run",
                                      "--epochs",
                                      "2",
                                      "--batch_size",
                                      "2",
                                      "--learning_rate",
                                      "0.001",
                                      "--seed",
                                      "11"};
  train_args.insert(train_args.end(), kTinyModel.begin(), kTinyModel.end());
  REQUIRE(run_cli(train_args) == 0);
  REQUIRE(fs::exists(tmp / "run/checkpoint_best.spck"));
  REQUIRE(fs::exists(tmp / "run/checkpoint_final.spck"));
  REQUIRE(fs::exists(tmp / "run/manifest.json"));
  {
    std::ifstream log(tmp / "run/metrics.jsonl");
    std::string line;
    int lines = 0;
    while (std::getline(log, line)) ++lines;
    REQUIRE(lines == 2);
  }

  REQUIRE(run_cli({"predict", "--checkpoint", tmp / "run/checkpoint_final.spck", "--data",
                   tmp / "train.json", "--out", tmp / "p1.json"}) == 0);
  REQUIRE(run_cli({"predict", "--checkpoint", tmp / "run/checkpoint_final.spck", "--data",
                   tmp / "train.json", "--out", tmp / "p2.json", "--workers", "2"}) == 0);
  REQUIRE(slurp(tmp / "p1.json") == slurp(tmp / "p2.json"));  // byte-identical

  const auto parsed = nlohmann::json::parse(slurp(tmp / "p1.json"));
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 6);
  for (const auto& rec : parsed)
    for (const auto& [name, spans] : rec.at("fields").items())
      for (const auto& s : spans)
        REQUIRE((s.at("source") == "span" || s.at("source") == "ner"));

  REQUIRE(run_cli({"eval", "--pred", tmp / "p1.json", "--data", tmp / "train.json", "--out",
                   tmp / "report.json"}) == 0);
  const auto report = nlohmann::json::parse(slurp(tmp / "report.json"));
  REQUIRE(report.contains("squad_f1"));
  REQUIRE(report.contains("conll_micro_f1"));
}

TEST_CASE("cli train records vocabulary size in the manifest and writes nothing on bad input") {
  TempDir tmp;
  REQUIRE(run_cli({"gen-synthetic", "--out", tmp / "t.json", "--size", "4", "--m", "2",
                   "--seed", "8", "--min-length", "40", "--max-length", "60"}) == 0);
  std::vector<std::string> args{"train", "--data", tmp / "t.json", "--out", tmp / "vocabrun",
                                "--epochs", "1", "--batch_size", "2"};
  args.insert(args.end(), kTinyModel.begin(), kTinyModel.end());
  REQUIRE(run_cli(args) == 0);
  const auto manifest = nlohmann::json::parse(slurp(tmp / "vocabrun/manifest.json"));
  REQUIRE(manifest["stats"]["vocabulary_size"].get<int>() > 3);
  REQUIRE(manifest["dataset_hashes"].size() == 1);

  // a config error must not leave partial outputs behind
  REQUIRE(run_cli({"train", "--data", tmp / "absent.json", "--out", tmp / "never"}) ==
          cli::kExitConfig);
  REQUIRE(!fs::exists(tmp / "never"));
}

TEST_CASE("cli predict on an empty document list writes an empty file, exit 0") {
  TempDir tmp;
  REQUIRE(run_cli({"gen-synthetic", "--out", tmp / "full.json", "--size", "3", "--m", "2",
                   "--seed", "2", "--min-length", "30", "--max-length", "40"}) == 0);
  std::vector<std::string> args{"train", "--data", tmp / "full.json", "--out", tmp / "er",
                                "--epochs", "1", "--batch_size", "2"};
  args.insert(args.end(), kTinyModel.begin(), kTinyModel.end());
  REQUIRE(run_cli(args) == 0);

  Dataset ds = load_dataset(tmp / "full.json");
  save_dataset(tmp / "empty.json", ds.schema, {});
  REQUIRE(run_cli({"predict", "--checkpoint", tmp / "er/checkpoint_final.spck", "--data",
                   tmp / "empty.json", "--out", tmp / "ep.json"}) == 0);
  REQUIRE(nlohmann::json::parse(slurp(tmp / "ep.json")).empty());
}

TEST_CASE("cli bench handles a single-document corpus") {
  TempDir tmp;
  std::vector<std::string> args{"bench", "--out", tmp / "one.csv", "--docs",       "1",
                                "--m",   "2",     "--min-length",  "40",
                                "--max-length",   "50"};
  args.insert(args.end(), kTinyModel.begin(), kTinyModel.end());
  REQUIRE(run_cli(args) == 0);
  std::istringstream csv(slurp(tmp / "one.csv"));
  std::string line;
  int joint_rows = 0, pairwise_rows = 0;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.rfind("joint,", 0) == 0) ++joint_rows;
    if (line.rfind("pairwise,", 0) == 0) ++pairwise_rows;
  }
  REQUIRE(joint_rows >= 2);  // train_epoch + inference
  REQUIRE(pairwise_rows == joint_rows);
}

TEST_CASE("cli eval scores gold-as-predictions at 1.0") {
  TempDir tmp;
  REQUIRE(run_cli({"gen-synthetic", "--out", tmp / "g.json", "--size", "4", "--m", "2",
                   "--seed", "9", "--min-length", "40", "--max-length", "60"}) == 0);
  Dataset ds = load_dataset(tmp / "g.json");
  std::vector<DocumentPrediction> preds;
  for (const auto& ex : ds.examples) {
    DocumentPrediction p;
    p.doc_id = ex.document.doc_id;
    p.extraction.fields.resize(ds.schema.size());
    for (const auto& ann : ex.annotations)
      for (const auto& s : ann.spans)
        p.extraction.fields[ann.field_index].push_back({s, SpanSource::kNerHead});
    preds.push_back(std::move(p));
  }
  write_predictions(tmp / "gold_preds.json", preds, documents_of(ds.examples), ds.schema);
  REQUIRE(run_cli({"eval", "--pred", tmp / "gold_preds.json", "--data", tmp / "g.json",
                   "--out", tmp / "r.json"}) == 0);
  const auto report = nlohmann::json::parse(slurp(tmp / "r.json"));
  REQUIRE(report["squad_f1"].get<double>() == 1.0);
  REQUIRE(report["conll_micro_f1"].get<double>() == 1.0);
}

TEST_CASE("cli predict rejects a checkpoint/dataset schema mismatch") {
  TempDir tmp;
  REQUIRE(run_cli({"gen-synthetic", "--out", tmp / "m2.json", "--size", "3", "--m", "2",
                   "--seed", "5", "--min-length", "40", "--max-length", "50"}) == 0);
  REQUIRE(run_cli({"gen-synthetic", "--out", tmp / "m3.json", "--size", "3", "--m", "3",
                   "--seed", "5", "--min-length", "40", "--max-length", "50"}) == 0);
  std::vector<std::string> train_args{"train", "--data", tmp / "m2.json", "--out",
                                      tmp / "run2", "--epochs", "1", "--batch_size", "2"};
  train_args.insert(train_args.end(), kTinyModel.begin(), kTinyModel.end());
  REQUIRE(run_cli(train_args) == 0);
  REQUIRE(run_cli({"predict", "--checkpoint", tmp / "run2/checkpoint_final.spck", "--data",
                   tmp / "m3.json", "--out", tmp / "never.json"}) == cli::kExitData);
}

TEST_CASE("cli train supports the pairwise baseline") {
  TempDir tmp;
  REQUIRE(run_cli({"gen-synthetic", "--out", tmp / "pw.json", "--size", "3", "--m", "2",
                   "--seed", "6", "--min-length", "30", "--max-length", "40"}) == 0);
  std::vector<std::string> train_args{"train", "--data", tmp / "pw.json", "--out",
                                      tmp / "pwrun", "--model", "pairwise", "--epochs", "1",
                                      "--batch_size", "2"};
  train_args.insert(train_args.end(), kTinyModel.begin(), kTinyModel.end());
  REQUIRE(run_cli(train_args) == 0);
  const LoadedCheckpoint ck = load_checkpoint_file(tmp / "pwrun/checkpoint_final.spck");
  REQUIRE(ck.header.model_type == "pairwise");
  REQUIRE(run_cli({"predict", "--checkpoint", tmp / "pwrun/checkpoint_final.spck", "--data",
                   tmp / "pw.json", "--out", tmp / "pwp.json"}) == 0);
}

TEST_CASE("cli bench emits one csv row per model and phase") {
  TempDir tmp;
  std::vector<std::string> args{"bench", "--out",       tmp / "bench.csv", "--docs", "2",
                                "--m",   "4",           "--min-length",    "50",     "--max-length",
                                "60",    "--no-train"};
  args.insert(args.end(), kTinyModel.begin(), kTinyModel.end());
  REQUIRE(run_cli(args) == 0);
  std::istringstream csv(slurp(tmp / "bench.csv"));
  std::string line;
  std::getline(csv, line);
  REQUIRE(line == "model,phase,documents,m,seconds,encoder_calls");
  long long joint_calls = -1, pairwise_calls = -1;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string model, phase, docs, m, secs, calls;
    std::getline(row, model, ',');
    std::getline(row, phase, ',');
    std::getline(row, docs, ',');
    std::getline(row, m, ',');
    std::getline(row, secs, ',');
    std::getline(row, calls, ',');
    if (model == "joint" && phase == "inference") joint_calls = std::stoll(calls);
    if (model == "pairwise" && phase == "inference") pairwise_calls = std::stoll(calls);
  }
  REQUIRE(joint_calls > 0);
  REQUIRE(pairwise_calls == 4 * joint_calls);
}
