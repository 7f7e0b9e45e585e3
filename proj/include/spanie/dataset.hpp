#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spanie/types.hpp"

namespace spanie {

struct Dataset {
  FieldSchema schema;
  std::vector<LabeledExample> examples;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline LabeledExample parse_example(const nlohmann::json& j, const FieldSchema& schema,
                                    std::size_t record_index) {
  const std::string where = "example #" + std::to_string(record_index);
  if (!j.is_object() || !j.contains("doc_id") || !j.contains("tokens"))
    throw FormatError(where + ": expected an object with doc_id and tokens");
  LabeledExample ex;
  ex.document.doc_id = j.at("doc_id").get<std::string>();
  for (const auto& t : j.at("tokens")) ex.document.tokens.push_back(t.get<std::string>());
  if (j.contains("raw_text")) ex.document.raw_text = j.at("raw_text").get<std::string>();
  if (j.contains("offsets"))
    for (const auto& o : j.at("offsets"))
      ex.document.char_offsets.emplace_back(o.at(0).get<int>(), o.at(1).get<int>());
  if (j.contains("annotations")) {
    for (const auto& a : j.at("annotations")) {
      const std::string field_name = a.at("field").get<std::string>();
      const int field_index = schema.index_of(field_name);
      if (field_index < 0)
        throw ValidationError(where + " (doc '" + ex.document.doc_id + "'): unknown field '" +
                              field_name + "'");
      SpanAnnotation ann{field_index, {}};
      for (const auto& s : a.at("spans")) {
        if (!s.is_array() || s.size() != 2)
          throw FormatError(where + ": span must be a [start,end] pair");
        ann.spans.push_back({s[0].get<int>(), s[1].get<int>()});
      }
      std::sort(ann.spans.begin(), ann.spans.end());
      ex.annotations.push_back(std::move(ann));
    }
  }
  std::sort(ex.annotations.begin(), ex.annotations.end(),
            [](const SpanAnnotation& a, const SpanAnnotation& b) {
              return a.field_index < b.field_index;
            });
  validate_example(ex, schema);
  return ex;
}

}  // namespace detail

inline Dataset parse_dataset_json(const std::string& text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(origin + ": " + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("schema") || !j.contains("examples"))
      throw FormatError(origin + ": top level must carry 'schema' and 'examples'");
    std::vector<std::string> names;
    for (const auto& f : j.at("schema").at("fields")) names.push_back(f.at("name").get<std::string>());
    Dataset ds;
    ds.schema = make_schema(names);
    std::size_t index = 0;
    for (const auto& e : j.at("examples"))
      ds.examples.push_back(detail::parse_example(e, ds.schema, index++));
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(origin + ": " + e.what());
  }
}

// Loads a dataset file; the order of fields in its schema block defines the
// field indices used everywhere downstream.
inline Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset_json(detail::read_file(path), path.string());
}

// Loads against a caller-supplied schema; names and order must match.
inline std::vector<LabeledExample> load_dataset(const std::filesystem::path& path,
                                                const FieldSchema& expected) {
  Dataset ds = load_dataset(path);
  if (ds.schema.names() != expected.names())
    throw ValidationError("'" + path.string() + "': schema (m=" +
                          std::to_string(ds.schema.size()) +
                          ") does not match the expected schema (m=" +
                          std::to_string(expected.size()) + ")");
  return std::move(ds.examples);
}

inline nlohmann::json dataset_to_json(const FieldSchema& schema,
                                      const std::vector<LabeledExample>& examples) {
  nlohmann::json j;
  j["schema"]["fields"] = nlohmann::json::array();
  for (const auto& f : schema.fields) j["schema"]["fields"].push_back({{"name", f.name}});
  j["examples"] = nlohmann::json::array();
  for (const auto& ex : examples) {
    nlohmann::json je;
    je["doc_id"] = ex.document.doc_id;
    je["tokens"] = ex.document.tokens;
    je["annotations"] = nlohmann::json::array();
    for (const auto& ann : ex.annotations) {
      nlohmann::json ja;
      ja["field"] = schema.fields[ann.field_index].name;
      ja["spans"] = nlohmann::json::array();
      for (const auto& s : ann.spans) ja["spans"].push_back({s.start, s.end});
      je["annotations"].push_back(std::move(ja));
    }
    j["examples"].push_back(std::move(je));
  }
  return j;
}

inline void save_dataset(const std::filesystem::path& path, const FieldSchema& schema,
                         const std::vector<LabeledExample>& examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << dataset_to_json(schema, examples).dump(2) << "\n";
}

}  // namespace spanie
