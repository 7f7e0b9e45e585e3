#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "spanie/encoder.hpp"
#include "spanie/trainer.hpp"

namespace spanie {

// Everything a run needs, settable from a key=value config file and
// overridable by command-line flags. Defaults follow the standard operating
// point: window 384 / stride 128, 20 epochs, batch 16, lr 5e-5, summed loss.
struct RunConfig {
  std::string model = "joint";  // joint | pairwise
  TrainingConfig training;
  int span_depth = 1;
  int min_count = 1;
  int workers = 1;
  ToyTransformerConfig encoder;  // vocab_size filled at build time

  void validate() const {
    if (model != "joint" && model != "pairwise")
      throw ConfigError("model must be 'joint' or 'pairwise', got '" + model + "'");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    training.validate();
  }

  nlohmann::json to_json() const {
    return {{"model", model},
            {"window_length", training.window_length},
            {"stride", training.stride},
            {"epochs", training.epochs},
            {"batch_size", training.batch_size},
            {"learning_rate", training.learning_rate},
            {"loss_mode", to_string(training.loss_mode)},
            {"alpha_init", training.alpha_init},
            {"seed", training.seed},
            {"span_depth", span_depth},
            {"min_count", min_count},
            {"workers", workers},
            {"encoder",
             {{"embed_dim", encoder.embed_dim},
              {"num_layers", encoder.num_layers},
              {"num_heads", encoder.num_heads},
              {"feedforward_dim", encoder.feedforward_dim},
              {"dropout", encoder.dropout}}}};
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  try {
    if constexpr (std::is_same_v<T, double>) return std::stod(value);
    else if constexpr (std::is_same_v<T, std::uint64_t>) return std::stoull(value);
    else return std::stoi(value);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  }
}

}  // namespace detail

inline void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "model") cfg.model = value;
  else if (key == "window_length") cfg.training.window_length = detail::parse_number<int>(key, value);
  else if (key == "stride") cfg.training.stride = detail::parse_number<int>(key, value);
  else if (key == "epochs") cfg.training.epochs = detail::parse_number<int>(key, value);
  else if (key == "batch_size") cfg.training.batch_size = detail::parse_number<int>(key, value);
  else if (key == "learning_rate") cfg.training.learning_rate = detail::parse_number<double>(key, value);
  else if (key == "loss_mode") cfg.training.loss_mode = loss_mode_from_string(value);
  else if (key == "alpha_init") cfg.training.alpha_init = detail::parse_number<double>(key, value);
  else if (key == "seed") cfg.training.seed = detail::parse_number<std::uint64_t>(key, value);
  else if (key == "span_depth") cfg.span_depth = detail::parse_number<int>(key, value);
  else if (key == "min_count") cfg.min_count = detail::parse_number<int>(key, value);
  else if (key == "workers") cfg.workers = detail::parse_number<int>(key, value);
  else if (key == "encoder.embed_dim") cfg.encoder.embed_dim = detail::parse_number<int>(key, value);
  else if (key == "encoder.num_layers") cfg.encoder.num_layers = detail::parse_number<int>(key, value);
  else if (key == "encoder.num_heads") cfg.encoder.num_heads = detail::parse_number<int>(key, value);
  else if (key == "encoder.feedforward_dim")
    cfg.encoder.feedforward_dim = detail::parse_number<int>(key, value);
  else if (key == "encoder.dropout") cfg.encoder.dropout = detail::parse_number<double>(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

// key = value lines; '#' starts a comment; blank lines ignored.
inline void load_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    apply_config_key(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
}

}  // namespace spanie
