#pragma once

#include <algorithm>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spanie/aggregation.hpp"
#include "spanie/types.hpp"

namespace spanie {

struct DocumentPrediction {
  std::string doc_id;
  AggregatedExtraction extraction;
};

// Token-overlap F1 of two inclusive intervals.
inline double token_overlap_f1(const Span& pred, const Span& gold) {
  const int lo = std::max(pred.start, gold.start);
  const int hi = std::min(pred.end, gold.end);
  const int overlap = std::max(0, hi - lo + 1);
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / pred.length();
  const double r = static_cast<double>(overlap) / gold.length();
  return 2.0 * p * r / (p + r);
}

namespace detail {

inline const LabeledExample& gold_for(const std::vector<LabeledExample>& golds,
                                      const std::string& doc_id) {
  for (const auto& g : golds)
    if (g.document.doc_id == doc_id) return g;
  throw ValidationError("predictions reference unknown doc_id '" + doc_id + "'");
}

inline void check_matched(const std::vector<DocumentPrediction>& preds,
                          const std::vector<LabeledExample>& golds) {
  if (preds.size() != golds.size())
    throw ValidationError("prediction/gold document counts differ: " +
                          std::to_string(preds.size()) + " vs " + std::to_string(golds.size()));
  for (const auto& p : preds) gold_for(golds, p.doc_id);
}

}  // namespace detail

// First-span token-overlap F1, averaged over every (document, field) pair.
// A pair with no prediction and no gold scores 1; one-sided pairs score 0;
// otherwise the first predicted span is scored against its best gold span.
inline double squad_f1(const std::vector<DocumentPrediction>& preds,
                       const std::vector<LabeledExample>& golds, int num_fields) {
  detail::check_matched(preds, golds);
  double total = 0.0;
  long pairs = 0;
  for (const auto& pred : preds) {
    const LabeledExample& gold = detail::gold_for(golds, pred.doc_id);
    if (pred.extraction.num_fields() != num_fields)
      throw ValidationError("doc '" + pred.doc_id + "': prediction has " +
                            std::to_string(pred.extraction.num_fields()) + " fields, expected " +
                            std::to_string(num_fields));
    for (int f = 0; f < num_fields; ++f) {
      ++pairs;
      const auto& spans = pred.extraction.fields[f];
      const SpanAnnotation* ann = gold.annotation_for(f);
      const bool has_gold = ann != nullptr && !ann->spans.empty();
      if (spans.empty()) {
        total += has_gold ? 0.0 : 1.0;
        continue;
      }
      if (!has_gold) continue;  // spurious prediction scores 0
      double best = 0.0;
      for (const auto& g : ann->spans) best = std::max(best, token_overlap_f1(spans.front().span, g));
      total += best;
    }
  }
  return pairs == 0 ? 1.0 : total / pairs;
}

struct ConllField {
  long tp = 0, fp = 0, fn = 0;
  long support = 0;  // gold entity count

  std::optional<double> f1() const {
    const long denom = 2 * tp + fp + fn;
    if (denom == 0) return std::nullopt;
    return 2.0 * tp / static_cast<double>(denom);
  }
};

struct ConllResult {
  std::vector<ConllField> per_field;
  double micro_f1 = 1.0;
};

// Exact-boundary, exact-field entity matching per the usual NER convention;
// micro F1 pools TP/FP/FN over all fields.
inline ConllResult conll_f1(const std::vector<DocumentPrediction>& preds,
                            const std::vector<LabeledExample>& golds, int num_fields) {
  detail::check_matched(preds, golds);
  ConllResult result;
  result.per_field.assign(num_fields, {});
  for (const auto& pred : preds) {
    const LabeledExample& gold = detail::gold_for(golds, pred.doc_id);
    for (int f = 0; f < num_fields; ++f) {
      std::set<Span> gold_set;
      if (const SpanAnnotation* ann = gold.annotation_for(f); ann != nullptr)
        gold_set.insert(ann->spans.begin(), ann->spans.end());
      std::set<Span> pred_set;
      for (const auto& ts : pred.extraction.fields[f]) pred_set.insert(ts.span);
      long tp = 0;
      for (const auto& s : pred_set) tp += gold_set.count(s) > 0 ? 1 : 0;
      result.per_field[f].tp += tp;
      result.per_field[f].fp += static_cast<long>(pred_set.size()) - tp;
      result.per_field[f].fn += static_cast<long>(gold_set.size()) - tp;
      result.per_field[f].support += static_cast<long>(gold_set.size());
    }
  }
  long tp = 0, fp = 0, fn = 0;
  for (const auto& f : result.per_field) {
    tp += f.tp;
    fp += f.fp;
    fn += f.fn;
  }
  const long denom = 2 * tp + fp + fn;
  result.micro_f1 = denom == 0 ? 1.0 : 2.0 * tp / static_cast<double>(denom);
  return result;
}

// Exact-match recall over gold spans, restricted to (document, field) pairs
// whose gold span count is at least min_gold_spans. Absent when no pair
// qualifies.
inline std::optional<double> multispan_recall(const std::vector<DocumentPrediction>& preds,
                                              const std::vector<LabeledExample>& golds,
                                              int num_fields, int min_gold_spans = 2) {
  detail::check_matched(preds, golds);
  long matched = 0, total = 0;
  for (const auto& pred : preds) {
    const LabeledExample& gold = detail::gold_for(golds, pred.doc_id);
    for (int f = 0; f < num_fields; ++f) {
      const SpanAnnotation* ann = gold.annotation_for(f);
      if (ann == nullptr || static_cast<int>(ann->spans.size()) < min_gold_spans) continue;
      std::set<Span> pred_set;
      for (const auto& ts : pred.extraction.fields[f]) pred_set.insert(ts.span);
      for (const auto& g : ann->spans) {
        ++total;
        matched += pred_set.count(g) > 0 ? 1 : 0;
      }
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(matched) / static_cast<double>(total);
}

struct MetricReport {
  double squad_f1 = 0.0;
  double conll_micro_f1 = 0.0;
  std::vector<std::optional<double>> conll_f1_per_field;
  std::vector<long> support_per_field;
  std::optional<double> multispan_recall;
};

inline MetricReport evaluate_predictions(const std::vector<DocumentPrediction>& preds,
                                         const std::vector<LabeledExample>& golds,
                                         const FieldSchema& schema, int min_gold_spans = 2) {
  MetricReport report;
  report.squad_f1 = squad_f1(preds, golds, schema.size());
  ConllResult conll = conll_f1(preds, golds, schema.size());
  report.conll_micro_f1 = conll.micro_f1;
  for (const auto& f : conll.per_field) {
    report.conll_f1_per_field.push_back(f.f1());
    report.support_per_field.push_back(f.support);
  }
  report.multispan_recall = multispan_recall(preds, golds, schema.size(), min_gold_spans);
  return report;
}

inline nlohmann::json metric_report_to_json(const MetricReport& report,
                                            const FieldSchema& schema) {
  nlohmann::json j;
  j["squad_f1"] = report.squad_f1;
  j["conll_micro_f1"] = report.conll_micro_f1;
  j["multispan_recall"] =
      report.multispan_recall.has_value() ? nlohmann::json(*report.multispan_recall)
                                          : nlohmann::json(nullptr);
  j["fields"] = nlohmann::json::array();
  for (int f = 0; f < schema.size(); ++f) {
    nlohmann::json jf;
    jf["name"] = schema.fields[f].name;
    jf["conll_f1"] = report.conll_f1_per_field[f].has_value()
                         ? nlohmann::json(*report.conll_f1_per_field[f])
                         : nlohmann::json(nullptr);
    jf["support"] = report.support_per_field[f];
    j["fields"].push_back(std::move(jf));
  }
  return j;
}

inline std::string metric_report_table(const MetricReport& report, const FieldSchema& schema) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "field                      conll_f1   support\n";
  out << "-----------------------------------------------\n";
  for (int f = 0; f < schema.size(); ++f) {
    out << std::left << std::setw(25) << schema.fields[f].name << "  ";
    if (report.conll_f1_per_field[f].has_value())
      out << std::right << std::setw(8) << *report.conll_f1_per_field[f];
    else
      out << std::right << std::setw(8) << "-";
    out << std::setw(10) << report.support_per_field[f] << "\n";
  }
  out << "-----------------------------------------------\n";
  out << "squad_f1          " << report.squad_f1 << "\n";
  out << "conll_micro_f1    " << report.conll_micro_f1 << "\n";
  out << "multispan_recall  ";
  if (report.multispan_recall.has_value())
    out << *report.multispan_recall << "\n";
  else
    out << "n/a (no multi-span gold fields)\n";
  return out.str();
}

}  // namespace spanie
