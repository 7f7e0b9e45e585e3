#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spanie/errors.hpp"
#include "spanie/version.hpp"

namespace spanie {

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

inline std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot hash '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64_hex(buf.str());
}

// One manifest per artifact-producing command: enough to reproduce the run.
struct RunManifest {
  std::string command;
  nlohmann::json config_echo;
  std::map<std::string, std::string> dataset_hashes;  // path -> fnv1a64
  std::uint64_t seed = 0;
  nlohmann::json stats;  // realized corpus statistics, vocabulary size, ...
  std::vector<std::string> outputs;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["code_version"] = kVersion;
    j["config"] = config_echo;
    j["dataset_hashes"] = dataset_hashes;
    j["seed"] = seed;
    j["stats"] = stats;
    j["outputs"] = outputs;
    return j;
  }
};

inline void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write manifest '" + path.string() + "'");
  out << manifest.to_json().dump(2) << "\n";
}

}  // namespace spanie
