#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spanie/metrics.hpp"
#include "spanie/types.hpp"

namespace spanie {

// Prediction file: a JSON array with one record per document,
//   {"doc_id": ..., "fields": {name: [{"start", "end", "source", "text"}]}}
// where source is "span" or "ner" and text joins the covered tokens.

inline nlohmann::json predictions_to_json(const std::vector<DocumentPrediction>& preds,
                                          const std::vector<Document>& docs,
                                          const FieldSchema& schema) {
  if (preds.size() != docs.size())
    throw ConfigError("predictions_to_json: prediction/document count mismatch");
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t d = 0; d < preds.size(); ++d) {
    const Document& doc = docs[d];
    nlohmann::json rec;
    rec["doc_id"] = preds[d].doc_id;
    rec["fields"] = nlohmann::json::object();
    for (int f = 0; f < schema.size(); ++f) {
      nlohmann::json spans = nlohmann::json::array();
      for (const auto& ts : preds[d].extraction.fields[f]) {
        std::string text;
        for (int t = ts.span.start; t <= ts.span.end; ++t) {
          if (!text.empty()) text += ' ';
          text += doc.tokens[t];
        }
        spans.push_back({{"start", ts.span.start},
                         {"end", ts.span.end},
                         {"source", ts.source == SpanSource::kSpanHead ? "span" : "ner"},
                         {"text", std::move(text)}});
      }
      rec["fields"][schema.fields[f].name] = std::move(spans);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline void write_predictions(const std::filesystem::path& path,
                              const std::vector<DocumentPrediction>& preds,
                              const std::vector<Document>& docs, const FieldSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write predictions to '" + path.string() + "'");
  out << predictions_to_json(preds, docs, schema).dump(2) << "\n";
}

inline std::vector<DocumentPrediction> parse_predictions_json(const nlohmann::json& j,
                                                              const FieldSchema& schema) {
  std::vector<DocumentPrediction> preds;
  for (const auto& rec : j) {
    DocumentPrediction p;
    p.doc_id = rec.at("doc_id").get<std::string>();
    p.extraction.fields.resize(schema.size());
    for (const auto& [name, spans] : rec.at("fields").items()) {
      const int f = schema.index_of(name);
      if (f < 0) throw ValidationError("prediction file references unknown field '" + name + "'");
      for (const auto& s : spans) {
        const std::string source = s.at("source").get<std::string>();
        if (source != "span" && source != "ner")
          throw FormatError("prediction span source must be 'span' or 'ner'");
        p.extraction.fields[f].push_back(
            {{s.at("start").get<int>(), s.at("end").get<int>()},
             source == "span" ? SpanSource::kSpanHead : SpanSource::kNerHead});
      }
    }
    preds.push_back(std::move(p));
  }
  return preds;
}

inline std::vector<DocumentPrediction> read_predictions(const std::filesystem::path& path,
                                                        const FieldSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open predictions '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return parse_predictions_json(j, schema);
}

}  // namespace spanie
