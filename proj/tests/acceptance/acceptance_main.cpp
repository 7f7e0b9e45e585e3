// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line. Run all (no arguments) or one (--criterion N).

#include <chrono>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <tuple>

#include "spanie/spanie.hpp"

using namespace spanie;
namespace fs = std::filesystem;

namespace {

struct Check {
  int id;
  std::string name;
  std::function<std::string()> run;  // returns detail text; throws on failure
};

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool cond, const std::string& what) {
  if (!cond) throw CheckFailure(what);
}

double elapsed_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(prec) << v;
  return out.str();
}

fs::path bundled_data(const char* name) {
  return fs::path(SPANIE_TEST_DATA_DIR) / name;
}

// ---------------------------------------------------------------------------
// 1. Gradient integrity: end-to-end finite differences on a tiny joint model.

std::string check_gradient_integrity() {
  const auto t0 = std::chrono::steady_clock::now();

  SyntheticSpec spec;
  spec.seed = 41;
  spec.size = 3;
  spec.num_fields = 2;
  spec.min_length = 10;
  spec.max_length = 12;
  spec.no_answer_rate = 0.3;
  spec.multispan_rate = 0.5;
  SyntheticCorpus corpus = generate_synthetic_corpus(spec);

  JointModelConfig cfg;
  cfg.encoder.embed_dim = 16;
  cfg.encoder.num_layers = 2;
  cfg.encoder.num_heads = 2;
  cfg.encoder.feedforward_dim = 24;
  cfg.encoder.parameter_init_seed = 13;
  cfg.window_length = 8;  // 13 augmented tokens -> 3 overlapping windows
  cfg.stride = 4;
  JointModel model(corpus.schema, Vocabulary::build(documents_of(corpus.examples)), cfg);
  const LabeledExample& example = corpus.examples[0];

  auto forward = [&]() {
    ad::Tape tape;
    return model.build_training_graph(tape, example, LossMode::kLearnableAlpha, false).total.scalar();
  };
  for (auto* p : model.parameters()) p->zero_grad();
  {
    ad::Tape tape;
    tape.backward(model.build_training_graph(tape, example, LossMode::kLearnableAlpha, false).total);
  }

  Rng rng(7);
  const double step = 1e-5, tolerance = 1e-4;
  long checked = 0, passed = 0;
  double worst = 0.0;
  for (ad::Param* p : model.parameters()) {
    std::vector<long> coords;
    if (p->size() <= 12) {
      for (long i = 0; i < p->size(); ++i) coords.push_back(i);
    } else {
      for (int i = 0; i < 12; ++i)
        coords.push_back(static_cast<long>(rng_below(rng, static_cast<std::uint64_t>(p->size()))));
    }
    for (long c : coords) {
      const double saved = p->value.data()[c];
      p->value.data()[c] = saved + step;
      const double up = forward();
      p->value.data()[c] = saved - step;
      const double down = forward();
      p->value.data()[c] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p->grad.data()[c];
      const double err =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      ++checked;
      if (err < tolerance) ++passed;
      worst = std::max(worst, err);
    }
  }
  const double frac = static_cast<double>(passed) / checked;
  const double secs = elapsed_since(t0);
  expect(frac >= 0.95, "only " + fmt(100 * frac, 1) + "% of " + std::to_string(checked) +
                           " coordinates within 1e-4 (worst " + fmt(worst, 6) + ")");
  expect(secs < 120.0, "took " + fmt(secs, 1) + "s, budget is 120s");
  return std::to_string(passed) + "/" + std::to_string(checked) +
         " sampled coordinates within 1e-4 rel. error across encoder, V, span stacks, NER, alpha; " +
         fmt(secs, 1) + "s";
}

// ---------------------------------------------------------------------------
// 2. Windowed averaging equals the independent brute-force reference.

std::string check_window_averaging() {
  ToyTransformerConfig ecfg;
  ecfg.vocab_size = 17;
  ecfg.embed_dim = 12;
  ecfg.num_layers = 1;
  ecfg.num_heads = 2;
  ecfg.feedforward_dim = 16;
  ecfg.max_position = 48;
  ecfg.parameter_init_seed = 23;
  ToyTransformerEncoder encoder(ecfg);

  Rng rng(1009);
  double worst_rel = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const int n = rng_int(rng, 1, 300);
    const int lw = rng_int(rng, 2, 48);
    const int sw = rng_int(rng, 1, lw);
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = rng_int(rng, 0, 16);
    const WindowPlan plan = plan_windows(n, lw, sw);

    const Mat fast = encode_with_averaging(ids, plan, encoder).vectors;

    Mat sum = Mat::Zero(n, encoder.output_dim());
    std::vector<int> hits(n, 0);
    for (const auto& w : plan.windows) {
      const Mat e = encoder.encode(std::span<const int>(ids).subspan(w.start, w.length()));
      for (int t = w.start; t <= w.end; ++t) {
        sum.row(t) += e.row(t - w.start);
        hits[t] += 1;
      }
    }
    for (int t = 0; t < n; ++t) sum.row(t) /= hits[t];

    for (int r = 0; r < n; ++r)
      for (int c = 0; c < encoder.output_dim(); ++c) {
        const double denom = std::max({std::abs(sum(r, c)), std::abs(fast(r, c)), 1e-30});
        worst_rel = std::max(worst_rel, std::abs(sum(r, c) - fast(r, c)) / denom);
      }
    expect(worst_rel < 1e-12, "case " + std::to_string(iter) + " deviates by " + fmt(worst_rel, 16));

    if (n <= lw) {
      const Mat direct = encoder.encode(ids);
      expect(fast == direct, "single-window case is not exactly a direct encoder pass");
    }
  }
  // explicit short-document identity
  std::vector<int> ids(30, 5);
  const Mat fast = encode_with_averaging(ids, plan_windows(30, 48, 16), encoder).vectors;
  expect(fast == encoder.encode(ids), "n <= window_length must equal a single pass exactly");
  return "100 random (n, L_w, s_w) cases within 1e-12 relative (worst " + fmt(worst_rel, 16) +
         "); short documents equal a single pass bit for bit";
}

// ---------------------------------------------------------------------------
// 3. Aggregation equals a brute-force reference on 1,000 random cases.

std::string check_aggregation_oracle() {
  Rng rng(31415);
  for (int iter = 0; iter < 1000; ++iter) {
    const int n = rng_int(rng, 1, 12);
    const int m = rng_int(rng, 1, 3);
    SpanPrediction pred;
    for (int f = 0; f < m; ++f) {
      FieldSpanPrediction fp;
      if (rng_unit(rng) < 0.7) {
        const int s = rng_int(rng, 0, n - 1);
        fp.span = Span{s, rng_int(rng, s, n - 1)};
      }
      pred.fields.push_back(std::move(fp));
    }
    std::vector<SpanAnnotation> ner;
    for (int f = 0; f < m; ++f) {
      SpanAnnotation ann{f, {}};
      int at = 0;
      while (at < n && rng_unit(rng) < 0.5) {
        const int s = rng_int(rng, at, n - 1);
        const int e = rng_int(rng, s, std::min(n - 1, s + 2));
        ann.spans.push_back({s, e});
        at = e + 2;
      }
      if (!ann.spans.empty()) ner.push_back(std::move(ann));
    }

    const AggregatedExtraction fast = aggregate(pred, ner, m);

    // reference: token-level intersection test per field
    for (int f = 0; f < m; ++f) {
      std::vector<TaggedSpan> expected;
      if (pred.fields[f].span.has_value())
        expected.push_back({*pred.fields[f].span, SpanSource::kSpanHead});
      for (const auto& ann : ner) {
        if (ann.field_index != f) continue;
        for (const auto& s : ann.spans) {
          bool overlap = false;
          if (pred.fields[f].span.has_value())
            for (int t = s.start; t <= s.end; ++t)
              overlap = overlap || (t >= pred.fields[f].span->start && t <= pred.fields[f].span->end);
          if (!overlap) expected.push_back({s, SpanSource::kNerHead});
        }
      }
      std::sort(expected.begin(), expected.end(), [](const TaggedSpan& a, const TaggedSpan& b) {
        if (a.span.start != b.span.start) return a.span.start < b.span.start;
        if (a.source != b.source) return a.source == SpanSource::kSpanHead;
        return a.span.end < b.span.end;
      });
      expect(fast.fields[f] == expected,
             "case " + std::to_string(iter) + " field " + std::to_string(f) +
                 " differs from the brute-force reference");
    }
  }
  return "1000 random merges identical to the brute-force reference";
}

// ---------------------------------------------------------------------------
// 4. Overfit on the bundled 50-document corpus.

std::string check_overfit() {
  const auto t0 = std::chrono::steady_clock::now();
  Dataset ds = load_dataset(bundled_data("synthetic_train.json"));
  expect(ds.examples.size() == 50, "bundled corpus must hold 50 documents");
  expect(ds.schema.size() == 4, "bundled corpus must define 4 fields");

  JointModelConfig mcfg;
  mcfg.encoder.embed_dim = 64;
  mcfg.encoder.num_layers = 2;
  mcfg.encoder.num_heads = 4;
  mcfg.encoder.feedforward_dim = 128;
  mcfg.encoder.parameter_init_seed = 7;
  mcfg.window_length = 384;
  mcfg.stride = 128;
  JointModel model(ds.schema, Vocabulary::build(documents_of(ds.examples)), mcfg);

  TrainingConfig tcfg;
  tcfg.epochs = 30;
  tcfg.batch_size = 4;
  tcfg.learning_rate = 2e-3;
  tcfg.seed = 7;

  // dev == train: the stop condition watches the training-set metrics
  double best_squad = 0.0, best_conll = 0.0;
  int reached_epoch = -1;
  train_model(model, tcfg, ds.examples, ds.examples, {}, [&](const EpochRecord& rec) {
    best_squad = std::max(best_squad, rec.dev_squad_f1);
    best_conll = std::max(best_conll, rec.dev_conll_f1);
    if (rec.dev_squad_f1 >= 0.95 && rec.dev_conll_f1 >= 0.90 && reached_epoch < 0)
      reached_epoch = rec.epoch;
    return reached_epoch > 0;
  });
  const double secs = elapsed_since(t0);
  expect(reached_epoch > 0, "thresholds not reached in 30 epochs (best squad " + fmt(best_squad) +
                                ", conll " + fmt(best_conll) + ")");
  expect(secs < 600.0, "took " + fmt(secs, 1) + "s, budget is 600s");
  return "train squad_f1 >= 0.95 and conll_f1 >= 0.90 at epoch " + std::to_string(reached_epoch) +
         " of 30 (" + fmt(secs, 1) + "s)";
}

// ---------------------------------------------------------------------------
// 5. Multi-span coverage: aggregation beats the bare span head on held-out
//    data by at least 0.25 absolute recall.

std::string check_multispan_direction() {
  SyntheticSpec spec;
  spec.seed = 505;
  spec.size = 40;
  spec.num_fields = 4;
  spec.multispan_rate = 0.27;
  spec.min_length = 280;
  spec.max_length = 420;
  SyntheticCorpus train = generate_synthetic_corpus(spec);
  spec.seed = 606;
  spec.size = 20;
  spec.doc_id_prefix = "heldout";
  SyntheticCorpus heldout = generate_synthetic_corpus(spec);

  JointModelConfig mcfg;
  mcfg.encoder.embed_dim = 64;
  mcfg.encoder.num_layers = 2;
  mcfg.encoder.num_heads = 4;
  mcfg.encoder.feedforward_dim = 128;
  mcfg.encoder.parameter_init_seed = 19;
  mcfg.window_length = 384;
  mcfg.stride = 128;
  JointModel model(train.schema, Vocabulary::build(documents_of(train.examples)), mcfg);

  TrainingConfig tcfg;
  tcfg.epochs = 24;
  tcfg.batch_size = 4;
  tcfg.learning_rate = 2e-3;
  tcfg.seed = 11;
  train_model(model, tcfg, train.examples, train.examples, {}, [](const EpochRecord& rec) {
    return rec.dev_squad_f1 >= 0.97 && rec.dev_conll_f1 >= 0.95;
  });

  std::vector<DocumentPrediction> full, span_only;
  for (const auto& ex : heldout.examples) {
    ModelOutputs out = model.predict(ex.document);
    full.push_back({ex.document.doc_id, out.aggregated});
    span_only.push_back({ex.document.doc_id, span_head_only(out.aggregated)});
  }
  const auto recall_full = multispan_recall(full, heldout.examples, 4);
  const auto recall_alone = multispan_recall(span_only, heldout.examples, 4);
  expect(recall_full.has_value() && recall_alone.has_value(),
         "held-out corpus lacks multi-span fields");
  const double gap = *recall_full - *recall_alone;
  expect(gap >= 0.25, "recall gap " + fmt(gap) + " (aggregate " + fmt(*recall_full) +
                          " vs span head " + fmt(*recall_alone) + ") below 0.25");
  return "held-out multispan recall: aggregate " + fmt(*recall_full) + " vs span head alone " +
         fmt(*recall_alone) + " (gap " + fmt(gap) + " >= 0.25)";
}

// ---------------------------------------------------------------------------
// 6. Efficiency: call ratio exactly m, and >= 3x single-worker inference
//    speedup at m = 8.

std::string check_efficiency() {
  // exact call-count ratios
  for (int m : {4, 8, 16}) {
    SyntheticSpec spec;
    spec.seed = 70 + m;
    spec.size = 2;
    spec.num_fields = m;
    spec.min_length = 120;
    spec.max_length = 160;
    SyntheticCorpus corpus = generate_synthetic_corpus(spec);
    Vocabulary vocab = Vocabulary::build(documents_of(corpus.examples));
    JointModelConfig jcfg;
    jcfg.encoder.embed_dim = 32;
    jcfg.encoder.num_layers = 1;
    jcfg.encoder.num_heads = 2;
    jcfg.encoder.feedforward_dim = 48;
    jcfg.window_length = 64;
    jcfg.stride = 32;
    PairwiseModelConfig pcfg;
    pcfg.encoder = jcfg.encoder;
    pcfg.window_length = 64;
    pcfg.stride = 32;
    JointModel joint(corpus.schema, vocab, jcfg);
    PairwiseModel pairwise(corpus.schema, vocab, pcfg);
    for (const auto& ex : corpus.examples) {
      joint.encoder().reset_call_count();
      pairwise.encoder().reset_call_count();
      joint.predict(ex.document);
      pairwise.predict(ex.document);
      expect(pairwise.encoder().call_count() == m * joint.encoder().call_count(),
             "m=" + std::to_string(m) + ": ratio " +
                 std::to_string(pairwise.encoder().call_count()) + "/" +
                 std::to_string(joint.encoder().call_count()) + " is not exactly m");
    }
  }

  // wall-clock at m=8 on the benchmark corpus, single worker
  SyntheticSpec spec;
  spec.seed = 99;
  spec.size = 12;
  spec.num_fields = 8;
  spec.min_length = 500;
  spec.max_length = 700;
  SyntheticCorpus corpus = generate_synthetic_corpus(spec);
  Vocabulary vocab = Vocabulary::build(documents_of(corpus.examples));
  JointModelConfig jcfg;
  jcfg.encoder.embed_dim = 64;
  jcfg.encoder.num_layers = 2;
  jcfg.encoder.num_heads = 4;
  jcfg.encoder.feedforward_dim = 128;
  jcfg.window_length = 384;
  jcfg.stride = 128;
  PairwiseModelConfig pcfg;
  pcfg.encoder = jcfg.encoder;
  pcfg.window_length = 384;
  pcfg.stride = 128;
  JointModel joint(corpus.schema, vocab, jcfg);
  PairwiseModel pairwise(corpus.schema, vocab, pcfg);
  const std::vector<Document> docs = documents_of(corpus.examples);

  const auto tj = std::chrono::steady_clock::now();
  predict_documents(joint, docs, 1);
  const double joint_secs = elapsed_since(tj);
  const auto tp = std::chrono::steady_clock::now();
  predict_documents(pairwise, docs, 1);
  const double pairwise_secs = elapsed_since(tp);

  const double speedup = pairwise_secs / joint_secs;
  expect(speedup >= 3.0, "joint " + fmt(joint_secs, 2) + "s vs pairwise " +
                             fmt(pairwise_secs, 2) + "s: speedup " + fmt(speedup, 2) + "x < 3x");
  return "call ratio exactly m for m in {4,8,16}; m=8 inference: joint " + fmt(joint_secs, 2) +
         "s vs pairwise " + fmt(pairwise_secs, 2) + "s (" + fmt(speedup, 1) + "x)";
}

// ---------------------------------------------------------------------------
// 7. Loss identities: exact sum, uniform cross-entropies, alpha in (0,1).

std::string check_loss_identities() {
  SyntheticSpec spec;
  spec.seed = 17;
  spec.size = 6;
  spec.num_fields = 3;
  spec.min_length = 24;
  spec.max_length = 40;
  SyntheticCorpus corpus = generate_synthetic_corpus(spec);
  JointModelConfig mcfg;
  mcfg.encoder.embed_dim = 16;
  mcfg.encoder.num_layers = 1;
  mcfg.encoder.num_heads = 2;
  mcfg.encoder.feedforward_dim = 24;
  mcfg.window_length = 16;
  mcfg.stride = 8;
  JointModel model(corpus.schema, Vocabulary::build(documents_of(corpus.examples)), mcfg);

  for (const auto& ex : corpus.examples) {
    ad::Tape tape;
    auto l = model.build_training_graph(tape, ex, LossMode::kSum, false);
    expect(l.total.scalar() == l.span.scalar() + l.ner.scalar(),
           "sum mode is not exact addition on '" + ex.document.doc_id + "'");
  }

  // zeroed heads emit uniform distributions: CE must equal ln(n+1) / ln(n_e)
  JointModel uniform(corpus.schema, Vocabulary::build(documents_of(corpus.examples)), mcfg);
  for (auto* p : uniform.parameters())
    if (p->name.rfind("span.", 0) == 0 || p->name.rfind("ner.", 0) == 0) p->value.setZero();
  const LabeledExample& ex = corpus.examples[0];
  const int n = ex.document.size();
  const int ne = bio_label_count(corpus.schema.size());
  ad::Tape tape;
  auto l = uniform.build_training_graph(tape, ex, LossMode::kSum, false);
  const double expected_span = 2.0 * std::log(static_cast<double>(n + 1));
  const double expected_ner = std::log(static_cast<double>(ne));
  expect(std::abs(l.span.scalar() - expected_span) < 1e-9,
         "uniform span CE " + fmt(l.span.scalar(), 12) + " != 2*ln(n+1) = " +
             fmt(expected_span, 12));
  expect(std::abs(l.ner.scalar() - expected_ner) < 1e-9,
         "uniform ner CE " + fmt(l.ner.scalar(), 12) + " != ln(n_e) = " + fmt(expected_ner, 12));

  // alpha stays strictly inside (0,1) across learnable-alpha training
  TrainingConfig tcfg;
  tcfg.epochs = 6;
  tcfg.batch_size = 2;
  tcfg.learning_rate = 5e-3;
  tcfg.loss_mode = LossMode::kLearnableAlpha;
  tcfg.seed = 3;
  TrainResult result = train_model(model, tcfg, corpus.examples, {});
  for (const auto& rec : result.history)
    expect(rec.alpha > 0.0 && rec.alpha < 1.0,
           "alpha left (0,1) at epoch " + std::to_string(rec.epoch));
  return "sum identity exact on 6 documents; uniform CE = ln(n+1) and ln(n_e) within 1e-9; "
         "alpha in (0,1) for all epochs";
}

// ---------------------------------------------------------------------------
// 8. Metric correctness against an independent scorer and hand cases.

std::string check_metric_correctness() {
  Rng rng(8888);
  for (int iter = 0; iter < 100; ++iter) {
    const int m = rng_int(rng, 1, 4);
    const int docs = rng_int(rng, 1, 4);
    std::vector<LabeledExample> golds;
    std::vector<DocumentPrediction> preds;
    for (int d = 0; d < docs; ++d) {
      LabeledExample ex;
      ex.document.doc_id = "d" + std::to_string(d);
      const int n = rng_int(rng, 4, 16);
      for (int i = 0; i < n; ++i) ex.document.tokens.push_back("t");
      std::vector<bool> used(n, false);
      for (int f = 0; f < m; ++f) {
        SpanAnnotation ann{f, {}};
        for (int k = 0; k < rng_int(rng, 0, 2); ++k) {
          const int s = rng_int(rng, 0, n - 1);
          const int e = std::min(n - 1, s + rng_int(rng, 0, 2));
          bool free = true;
          for (int t = s; t <= e; ++t) free = free && !used[t];
          if (!free) continue;
          for (int t = s; t <= e; ++t) used[t] = true;
          ann.spans.push_back({s, e});
        }
        std::sort(ann.spans.begin(), ann.spans.end());
        if (!ann.spans.empty()) ex.annotations.push_back(ann);
      }
      DocumentPrediction p;
      p.doc_id = ex.document.doc_id;
      p.extraction.fields.resize(m);
      std::set<std::tuple<int, int, int>> emitted;
      for (const auto& ann : ex.annotations)
        for (const auto& s : ann.spans) {
          if (rng_unit(rng) < 0.3) continue;
          Span out = s;
          if (rng_unit(rng) < 0.25) out.end = std::min(n - 1, out.end + 1);
          if (emitted.insert({ann.field_index, out.start, out.end}).second)
            p.extraction.fields[ann.field_index].push_back({out, SpanSource::kNerHead});
        }
      if (rng_unit(rng) < 0.4) {
        const int f = rng_int(rng, 0, m - 1);
        if (emitted.insert({f, 0, 0}).second)
          p.extraction.fields[f].push_back({{0, 0}, SpanSource::kNerHead});
      }
      golds.push_back(std::move(ex));
      preds.push_back(std::move(p));
    }

    // independent CoNLL scorer over (doc, field, start, end) tuples
    std::set<std::tuple<std::string, int, int, int>> gold_set, pred_set;
    for (const auto& g : golds)
      for (const auto& ann : g.annotations)
        for (const auto& s : ann.spans)
          gold_set.insert({g.document.doc_id, ann.field_index, s.start, s.end});
    for (const auto& p : preds)
      for (int f = 0; f < m; ++f)
        for (const auto& ts : p.extraction.fields[f])
          pred_set.insert({p.doc_id, f, ts.span.start, ts.span.end});
    long tp = 0;
    for (const auto& item : pred_set) tp += gold_set.count(item) > 0 ? 1 : 0;
    const long fp = static_cast<long>(pred_set.size()) - tp;
    const long fn = static_cast<long>(gold_set.size()) - tp;
    const double reference =
        (2 * tp + fp + fn) == 0 ? 1.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    const double mine = conll_f1(preds, golds, m).micro_f1;
    expect(std::abs(mine - reference) < 1e-12,
           "case " + std::to_string(iter) + ": conll " + fmt(mine, 10) + " vs reference " +
               fmt(reference, 10));
  }

  // squad hand cases
  auto make_gold = [](std::vector<Span> spans) {
    LabeledExample ex;
    ex.document.doc_id = "d";
    for (int i = 0; i < 10; ++i) ex.document.tokens.push_back("t");
    if (!spans.empty()) ex.annotations.push_back({0, std::move(spans)});
    return ex;
  };
  auto make_pred = [](std::vector<Span> spans) {
    DocumentPrediction p;
    p.doc_id = "d";
    p.extraction.fields.resize(1);
    for (const auto& s : spans) p.extraction.fields[0].push_back({s, SpanSource::kSpanHead});
    return p;
  };
  expect(squad_f1({make_pred({{2, 4}})}, {make_gold({{2, 4}})}, 1) == 1.0, "exact match != 1.0");
  expect(squad_f1({make_pred({{0, 1}})}, {make_gold({{7, 8}})}, 1) == 0.0, "disjoint != 0.0");
  const double partial = squad_f1({make_pred({{2, 4}})}, {make_gold({{3, 5}})}, 1);
  expect(std::abs(partial - 2.0 / 3.0) < 1e-12, "2/3-overlap case gives " + fmt(partial, 10));
  return "conll micro-F1 matches the independent scorer on 100 random cases; squad hand cases "
         "(1.0 / 0.0 / 2/3) exact";
}

// ---------------------------------------------------------------------------
// 9. Determinism: identical loss curves and byte-identical prediction files.

std::string check_determinism() {
  SyntheticSpec spec;
  spec.seed = 12;
  spec.size = 8;
  spec.num_fields = 3;
  spec.min_length = 80;
  spec.max_length = 140;
  SyntheticCorpus corpus = generate_synthetic_corpus(spec);
  const Vocabulary vocab = Vocabulary::build(documents_of(corpus.examples));

  JointModelConfig mcfg;
  mcfg.encoder.embed_dim = 32;
  mcfg.encoder.num_layers = 2;
  mcfg.encoder.num_heads = 2;
  mcfg.encoder.feedforward_dim = 48;
  mcfg.encoder.parameter_init_seed = 5;
  mcfg.window_length = 64;
  mcfg.stride = 32;
  TrainingConfig tcfg;
  tcfg.epochs = 3;
  tcfg.batch_size = 2;
  tcfg.learning_rate = 1e-3;
  tcfg.seed = 2718;

  JointModel a(corpus.schema, vocab, mcfg);
  JointModel b(corpus.schema, vocab, mcfg);
  TrainResult ra = train_model(a, tcfg, corpus.examples, {});
  TrainResult rb = train_model(b, tcfg, corpus.examples, {});
  expect(ra.history.size() == rb.history.size(), "epoch counts differ");
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    expect(ra.history[i].loss == rb.history[i].loss &&
               ra.history[i].span_loss == rb.history[i].span_loss &&
               ra.history[i].ner_loss == rb.history[i].ner_loss,
           "loss curves diverge at epoch " + std::to_string(i + 1));
  }

  const std::vector<Document> docs = documents_of(corpus.examples);
  const fs::path dir = fs::temp_directory_path();
  write_predictions(dir / "spanie_accept_p1.json", predict_documents(a, docs, 1), docs,
                    corpus.schema);
  write_predictions(dir / "spanie_accept_p2.json", predict_documents(b, docs, 2), docs,
                    corpus.schema);
  std::ifstream f1(dir / "spanie_accept_p1.json", std::ios::binary);
  std::ifstream f2(dir / "spanie_accept_p2.json", std::ios::binary);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  expect(s1.str() == s2.str(), "prediction files are not byte-identical");
  expect(!s1.str().empty(), "prediction files are empty");
  return "two seeded runs: identical loss curves (bitwise) and byte-identical prediction files";
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Check> checks = {
      {1, "gradient integrity", check_gradient_integrity},
      {2, "windowed-averaging oracle", check_window_averaging},
      {3, "aggregation oracle", check_aggregation_oracle},
      {4, "overfit on the bundled corpus", check_overfit},
      {5, "multi-span coverage direction", check_multispan_direction},
      {6, "efficiency of shared encoding", check_efficiency},
      {7, "loss identities", check_loss_identities},
      {8, "metric correctness", check_metric_correctness},
      {9, "determinism", check_determinism},
  };

  int only = -1;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--list") == 0) {
      for (const auto& c : checks) std::cout << c.id << ": " << c.name << "\n";
      return 0;
    } else {
      std::cerr << "usage: spanie_acceptance [--criterion N | --list]\n";
      return 2;
    }
  }

  int failures = 0, ran = 0;
  for (const auto& check : checks) {
    if (only > 0 && check.id != only) continue;
    ++ran;
    try {
      const std::string detail = check.run();
      std::cout << "PASS criterion " << check.id << ": " << check.name << " -- " << detail
                << std::endl;
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL criterion " << check.id << ": " << check.name << " -- " << e.what()
                << std::endl;
    }
  }
  if (ran == 0) {
    std::cerr << "no such criterion\n";
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
