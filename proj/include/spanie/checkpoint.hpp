#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "spanie/autodiff.hpp"
#include "spanie/types.hpp"
#include "spanie/vocab.hpp"

namespace spanie {

// Checkpoint layout, stable across releases:
//   bytes 0-7   magic "SPANIECK"
//   bytes 8-11  format version (u32, little-endian), currently 1
//   bytes 12-19 header length H (u64, little-endian)
//   H bytes     UTF-8 JSON header: model type, config echo, schema, vocab,
//               and an array index {name, rows, cols, offset}
//   rest        parameter payload: float64 little-endian, column-major,
//               in header order; offset counts doubles from payload start.
inline constexpr char kCheckpointMagic[8] = {'S', 'P', 'A', 'N', 'I', 'E', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointHeader {
  std::string model_type;
  nlohmann::json config;
  std::vector<std::string> schema_names;
  std::vector<std::string> vocab_tokens;
};

inline void save_checkpoint(const std::filesystem::path& path, const std::string& model_type,
                            const nlohmann::json& config, const FieldSchema& schema,
                            const Vocabulary& vocab,
                            const std::vector<const ad::Param*>& params) {
  nlohmann::json header;
  header["model"] = model_type;
  header["config"] = config;
  header["schema"] = schema.names();
  header["vocab"] = vocab.tokens();
  header["byte_order"] = "little";
  nlohmann::json arrays = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto* p : params) {
    arrays.push_back({{"name", p->name},
                      {"rows", p->value.rows()},
                      {"cols", p->value.cols()},
                      {"offset", offset}});
    offset += static_cast<std::uint64_t>(p->value.size());
  }
  header["arrays"] = std::move(arrays);
  const std::string header_bytes = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint '" + path.string() + "'");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint32_t version = kCheckpointVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::uint64_t hlen = header_bytes.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
  for (const auto* p : params)
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  if (!out) throw ConfigError("failed while writing checkpoint '" + path.string() + "'");
}

struct LoadedCheckpoint {
  CheckpointHeader header;
  std::map<std::string, Mat> arrays;

  const Mat& array(const std::string& name) const {
    auto it = arrays.find(name);
    if (it == arrays.end())
      throw FormatError("checkpoint is missing parameter '" + name + "'");
    return it->second;
  }

  // Copies the stored array into a live parameter, shape-checked.
  void restore(ad::Param& p) const {
    const Mat& stored = array(p.name);
    if (stored.rows() != p.value.rows() || stored.cols() != p.value.cols())
      throw ConfigError("checkpoint parameter '" + p.name + "' has shape " +
                        std::to_string(stored.rows()) + "x" + std::to_string(stored.cols()) +
                        ", expected " + std::to_string(p.value.rows()) + "x" +
                        std::to_string(p.value.cols()));
    p.value = stored;
  }
};

inline LoadedCheckpoint load_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path.string() + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw FormatError("'" + path.string() + "' is not a checkpoint file");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint format version " + std::to_string(version) +
                      " is not supported");
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string header_bytes(hlen, '\0');
  in.read(header_bytes.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw FormatError("truncated checkpoint header in '" + path.string() + "'");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("corrupt checkpoint header: " + std::string(e.what()));
  }
  LoadedCheckpoint loaded;
  loaded.header.model_type = header.at("model").get<std::string>();
  loaded.header.config = header.at("config");
  loaded.header.schema_names = header.at("schema").get<std::vector<std::string>>();
  loaded.header.vocab_tokens = header.at("vocab").get<std::vector<std::string>>();
  for (const auto& a : header.at("arrays")) {
    const std::string name = a.at("name").get<std::string>();
    const int rows = a.at("rows").get<int>();
    const int cols = a.at("cols").get<int>();
    Mat m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw FormatError("truncated checkpoint payload at parameter '" + name + "'");
    loaded.arrays.emplace(name, std::move(m));
  }
  return loaded;
}

}  // namespace spanie
