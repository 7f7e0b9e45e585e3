#pragma once

#include <thread>
#include <vector>

#include "spanie/metrics.hpp"
#include "spanie/types.hpp"

namespace spanie {

// Predicts every document, optionally across worker threads. Documents are
// independent and parameters are read-only during prediction, so the result
// is identical for any worker count; output order follows input order.
template <typename Model>
std::vector<DocumentPrediction> predict_documents(Model& model, const std::vector<Document>& docs,
                                                  int workers = 1) {
  std::vector<DocumentPrediction> preds(docs.size());
  if (workers <= 1 || docs.size() <= 1) {
    for (std::size_t i = 0; i < docs.size(); ++i)
      preds[i] = {docs[i].doc_id, model.predict(docs[i]).aggregated};
    return preds;
  }
  const int nthreads = std::min<int>(workers, static_cast<int>(docs.size()));
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int w = 0; w < nthreads; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < docs.size(); i += nthreads)
        preds[i] = {docs[i].doc_id, model.predict(docs[i]).aggregated};
    });
  }
  for (auto& t : pool) t.join();
  return preds;
}

inline std::vector<Document> documents_of(const std::vector<LabeledExample>& examples) {
  std::vector<Document> docs;
  docs.reserve(examples.size());
  for (const auto& ex : examples) docs.push_back(ex.document);
  return docs;
}

}  // namespace spanie
