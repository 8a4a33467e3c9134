// Acceptance suite. Each criterion runs standalone, prints one PASS/FAIL
// line with its elapsed time, and the process exits nonzero when any
// criterion fails. Tolerances and time budgets are pinned below.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kwic/baselines.hpp"
#include "kwic/corpus.hpp"
#include "kwic/evaluate.hpp"
#include "kwic/keyword.hpp"
#include "kwic/neural.hpp"
#include "kwic/pipeline.hpp"
#include "kwic/rng.hpp"
#include "kwic/select.hpp"
#include "kwic/synth.hpp"
#include "kwic/vectorize.hpp"

namespace {

using namespace kwic;

// Pinned tolerances and budgets.
constexpr double kCnnGradTol = 1e-4;        // max relative error, CNN loss gradient
constexpr double kLogisticGradTol = 1e-6;   // max relative error, logistic objective
constexpr double kGradTimeBudget = 60.0;    // seconds
constexpr double kKnnTimeBudget = 30.0;     // seconds
constexpr double kSignalTimeBudget = 600.0; // seconds
constexpr double kPrecisionLift = 0.20;     // document precision over keyword baseline
constexpr double kCleaningSlack = 0.01;     // PR-AUC non-inferiority margin
constexpr double kEnvelopeEps = 1e-12;      // fold-average containment slack

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool same_bits(double a, double b) {
  std::uint64_t ua, ub;
  std::memcpy(&ua, &a, sizeof ua);
  std::memcpy(&ub, &b, sizeof ub);
  return ua == ub;
}

// ---------------------------------------------------------------------------
// Criterion 1: analytic gradients against central finite differences.

Outcome criterion_gradients() {
  Rng rng(0xacce5501ull);
  long double worst_cnn = 0.0L;
  for (int trial = 0; trial < 100; ++trial) {
    CnnConfig config;
    config.embed_dim = 1 + static_cast<int>(rng.below(4));
    config.n_filters = 1 + static_cast<int>(rng.below(4));
    config.kernel_size = 1 + static_cast<int>(rng.below(3));
    config.dropout_rate = 0.0;
    const int length = config.kernel_size + static_cast<int>(rng.below(4));
    const auto vocab_size = static_cast<std::int32_t>(1 + rng.below(6));

    Rng init(rng.next_u64());
    const auto model = init_cnn_model<long double>(config, vocab_size, length, 0, init);

    EncodedWindow window;
    window.indices.reserve(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i)
      window.indices.push_back(static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(vocab_size) + 2)));
    const bool positive = rng.bernoulli(0.5);

    const long double err = gradient_check<long double>(model, window, positive, 1e-6L);
    if (err > worst_cnn) worst_cnn = err;
  }

  long double worst_logistic = 0.0L;
  using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  for (int trial = 0; trial < 100; ++trial) {
    const auto dim = static_cast<std::int32_t>(1 + rng.below(5));
    const std::size_t n = 1 + rng.below(12);
    std::vector<BowExample> examples;
    for (std::size_t e = 0; e < n; ++e) {
      BowExample ex;
      ex.features.dimension = dim;
      for (std::int32_t f = 0; f < dim; ++f)
        if (rng.bernoulli(0.6))
          ex.features.entries.emplace_back(f, static_cast<double>(1 + rng.below(3)));
      double sq = 0.0;
      for (const auto& [idx, count] : ex.features.entries) sq += count * count;
      ex.features.norm = std::sqrt(sq);
      ex.positive = rng.bernoulli(0.5);
      examples.push_back(std::move(ex));
    }

    Vec w(dim);
    for (std::int32_t f = 0; f < dim; ++f) w(f) = static_cast<long double>(rng.uniform(-1.0, 1.0));
    long double b = static_cast<long double>(rng.uniform(-1.0, 1.0));
    const long double reg = static_cast<long double>(rng.uniform(0.0, 0.1));

    Vec grad_w(dim);
    long double grad_b = 0.0L;
    logistic_objective<long double>(w, b, examples, reg, &grad_w, &grad_b);

    const long double h = 1e-7L;
    const auto check = [&](long double analytic, long double up, long double down) {
      const long double numeric = (up - down) / (2.0L * h);
      const long double denom = std::max(std::abs(analytic) + std::abs(numeric), 1e-8L);
      const long double rel = std::abs(analytic - numeric) / denom;
      if (rel > worst_logistic) worst_logistic = rel;
    };
    for (std::int32_t f = 0; f < dim; ++f) {
      Vec wp = w, wm = w;
      wp(f) += h;
      wm(f) -= h;
      check(grad_w(f), logistic_objective<long double>(wp, b, examples, reg),
            logistic_objective<long double>(wm, b, examples, reg));
    }
    check(grad_b, logistic_objective<long double>(w, b + h, examples, reg),
          logistic_objective<long double>(w, b - h, examples, reg));
  }

  Outcome out;
  out.pass = worst_cnn < static_cast<long double>(kCnnGradTol) &&
             worst_logistic < static_cast<long double>(kLogisticGradTol);
  out.detail = "worst cnn rel err " + fmt_double(static_cast<double>(worst_cnn)) + " (tol 1e-4), logistic " +
               fmt_double(static_cast<double>(worst_logistic)) + " (tol 1e-6)";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 2: both neighbor-cleaning scores bit-equal to an exhaustive
// all-pairs brute force.

BowVector random_bow(Rng& rng, std::int32_t dim) {
  BowVector v;
  v.dimension = dim;
  for (std::int32_t f = 0; f < dim; ++f)
    if (rng.bernoulli(0.4)) v.entries.emplace_back(f, static_cast<double>(1 + rng.below(3)));
  double sq = 0.0;
  for (const auto& [idx, count] : v.entries) sq += count * count;
  v.norm = std::sqrt(sq);
  return v;
}

// Full-sort oracle with the documented ordering (similarity descending,
// index ascending) and summation in that order.
double brute_mean_top_k(const BowVector& query, const std::vector<BowVector>& pool, int k,
                        std::size_t skip_index) {
  std::vector<std::pair<double, std::size_t>> sims;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i == skip_index) continue;
    sims.emplace_back(cosine(query, pool[i]), i);
  }
  std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  double sum = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) sum += sims[i].first;
  return sum / static_cast<double>(k);
}

Outcome criterion_knn_equivalence() {
  Rng rng(0xacce5502ull);
  const int k_choices[] = {1, 3, 5};
  std::size_t instances = 0, mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = k_choices[rng.below(3)];
    const std::size_t n_candidates = static_cast<std::size_t>(k) + 1 + rng.below(200 - static_cast<std::size_t>(k));
    const std::size_t n_negatives = static_cast<std::size_t>(k) + rng.below(200 - static_cast<std::size_t>(k)) + 1;
    const auto dim = static_cast<std::int32_t>(4 + rng.below(28));

    std::vector<BowVector> candidates, negatives;
    for (std::size_t i = 0; i < n_candidates; ++i) candidates.push_back(random_bow(rng, dim));
    for (std::size_t i = 0; i < n_negatives; ++i) negatives.push_back(random_bow(rng, dim));

    const auto v1 = score_candidates_v1(candidates, negatives, k);
    const auto v2 = score_candidates_v2(candidates, negatives, k);
    ++instances;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double b1 = brute_mean_top_k(candidates[i], negatives, k, negatives.size());
      if (!same_bits(v1[i], b1)) ++mismatches;

      const double neg_mean = brute_mean_top_k(candidates[i], negatives, k, negatives.size());
      const double cand_mean = brute_mean_top_k(candidates[i], candidates, k, i);
      const double b2 =
          cand_mean == 0.0 ? std::numeric_limits<double>::infinity() : neg_mean / cand_mean;
      if (!same_bits(v2[i], b2)) ++mismatches;
    }
  }

  Outcome out;
  out.pass = mismatches == 0;
  out.detail = std::to_string(instances) + " instances, both approaches bit-equal to brute force (" +
               std::to_string(mismatches) + " mismatches)";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 3: selection fraction is non-decreasing across the cutoff sweep
// and cutoff 1.0 keeps every candidate.

Outcome criterion_selection_monotone() {
  Rng rng(0xacce5503ull);
  const std::vector<double> sweep = {0.6, 0.7, 0.8, 0.9, 1.0};
  const int k_choices[] = {1, 3, 5};
  for (int trial = 0; trial < 200; ++trial) {
    const int k = k_choices[rng.below(3)];
    const std::size_t n_candidates = 1 + rng.below(120);
    const std::size_t n_negatives = static_cast<std::size_t>(k) + rng.below(120);
    const auto dim = static_cast<std::int32_t>(3 + rng.below(20));

    std::vector<BowVector> candidates, negatives;
    for (std::size_t i = 0; i < n_candidates; ++i) candidates.push_back(random_bow(rng, dim));
    for (std::size_t i = 0; i < n_negatives; ++i) negatives.push_back(random_bow(rng, dim));
    const auto scores = score_candidates_v1(candidates, negatives, k);

    double prev = -1.0;
    for (double cutoff : sweep) {
      const Selection sel = select(scores, cutoff);
      if (sel.fraction < prev)
        return {false, "fraction decreased at cutoff " + fmt_double(cutoff) + " on trial " +
                           std::to_string(trial)};
      prev = sel.fraction;
    }
    const Selection full = select(scores, 1.0);
    if (full.selected.size() != scores.size() || full.fraction != 1.0)
      return {false, "cutoff 1.0 kept " + std::to_string(full.selected.size()) + " of " +
                         std::to_string(scores.size()) + " on trial " + std::to_string(trial)};
  }
  return {true, "200 random score sets, sweep {0.6,0.7,0.8,0.9,1.0} monotone, cutoff 1.0 keeps 100%"};
}

// ---------------------------------------------------------------------------
// Criterion 4: threshold-sweep contracts on random scored sets.

Outcome criterion_threshold_contracts() {
  Rng rng(0xacce5504ull);
  const double targets[] = {0.5, 0.75, 0.85, 0.9, 1.0};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng.below(48);  // at most 50 items
    std::vector<ScoredItem> items;
    for (std::size_t i = 0; i < n; ++i)
      items.push_back({static_cast<double>(rng.below(12)) / 11.0, rng.bernoulli(0.45)});
    items[0].positive = true;  // both classes must appear
    items[1].positive = false;

    std::size_t total_pos = 0, total_neg = 0;
    for (const auto& it : items) (it.positive ? total_pos : total_neg) += 1;

    // Distinct thresholds descending with cumulative counts, by enumeration.
    std::vector<double> distinct;
    for (const auto& it : items) distinct.push_back(it.score);
    std::sort(distinct.begin(), distinct.end(), std::greater<>());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const auto counts_at = [&](double t, std::size_t& tp, std::size_t& fp) {
      tp = fp = 0;
      for (const auto& it : items)
        if (it.score >= t) (it.positive ? tp : fp) += 1;
    };

    const double target = targets[rng.below(5)];
    const auto r = precision_at_recall(items, target);
    if (r.recall < target)
      return {false, "recall below target on trial " + std::to_string(trial)};

    std::size_t tp = 0, fp = 0;
    counts_at(r.threshold, tp, fp);
    if (!same_bits(r.precision, static_cast<double>(tp) / static_cast<double>(tp + fp)) ||
        !same_bits(r.recall, static_cast<double>(tp) / static_cast<double>(total_pos)) ||
        r.reviewed != tp + fp)
      return {false, "threshold stats disagree with enumeration on trial " + std::to_string(trial)};
    for (double t : distinct) {
      if (t <= r.threshold) break;
      std::size_t tpp = 0, fpp = 0;
      counts_at(t, tpp, fpp);
      if (static_cast<double>(tpp) / static_cast<double>(total_pos) >= target)
        return {false, "threshold not minimal on trial " + std::to_string(trial)};
    }

    const auto s = savings(items, target);
    if (s.savings + s.reviewed_fraction != 1.0)
      return {false, "savings identity broken on trial " + std::to_string(trial)};
    if (!same_bits(s.threshold, r.threshold))
      return {false, "savings threshold differs on trial " + std::to_string(trial)};

    const Curves c = curves(items);
    if (c.roc.size() != distinct.size() || c.pr.size() != distinct.size())
      return {false, "curve point count differs on trial " + std::to_string(trial)};
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      std::size_t tpi = 0, fpi = 0;
      counts_at(distinct[i], tpi, fpi);
      const bool ok =
          same_bits(c.roc[i].threshold, distinct[i]) && same_bits(c.pr[i].threshold, distinct[i]) &&
          same_bits(c.roc[i].tpr, static_cast<double>(tpi) / static_cast<double>(total_pos)) &&
          same_bits(c.roc[i].fpr, static_cast<double>(fpi) / static_cast<double>(total_neg)) &&
          same_bits(c.pr[i].recall, static_cast<double>(tpi) / static_cast<double>(total_pos)) &&
          same_bits(c.pr[i].precision, static_cast<double>(tpi) / static_cast<double>(tpi + fpi));
      if (!ok) return {false, "curve point differs from enumeration on trial " + std::to_string(trial)};
    }
  }
  return {true, "1000 random sets: recall floor, threshold minimality, exact savings identity, curves bit-equal"};
}

// ---------------------------------------------------------------------------
// Criterion 5: on a large synthetic corpus the classifier beats raw keyword
// review precision at 75% document recall by a wide margin.

Outcome criterion_signal_recovery() {
  SynthSpec spec;
  spec.n_docs = 10000;
  spec.privileged_fraction = 0.10;
  spec.keywords = {KeywordPattern::parse("privilege*")};
  spec.footer_probability = 0.30;
  spec.planted_context_vocab = {"counsel", "attorney", "opinion",      "retention",
                                "strategy", "litigation", "memorandum", "draft",
                                "confidential", "advice", "settlement", "review"};
  spec.background_vocab = {"meeting", "schedule", "invoice", "quarter", "budget", "shipment",
                           "order",   "vendor",   "payment", "travel",  "agenda", "forecast"};
  spec.seed = 90210;
  const Corpus corpus = generate_synthetic(spec);

  const KeywordPattern kw = spec.keywords.front();
  std::vector<Occurrence> occurrences;
  for (const auto& doc : corpus.documents) {
    auto hits = extract_occurrences(doc, kw, 20);
    occurrences.insert(occurrences.end(), hits.begin(), hits.end());
  }
  occurrences = derive_labels(corpus, occurrences, true);

  // 70/30 split by document, stratified on the document's privilege flag.
  std::vector<std::string> doc_ids;
  std::vector<bool> doc_labels;
  std::unordered_map<std::string, std::size_t> doc_slot;
  for (const auto& occ : occurrences) {
    if (doc_slot.count(occ.doc_id)) continue;
    doc_slot.emplace(occ.doc_id, doc_ids.size());
    doc_ids.push_back(occ.doc_id);
    doc_labels.push_back(corpus.find(occ.doc_id)->privileged);
  }
  const SplitIndices split = split_70_30(doc_labels, 0x5e77ull);
  std::unordered_set<std::string> train_docs;
  for (std::size_t i : split.train) train_docs.insert(doc_ids[i]);

  std::vector<Occurrence> train_occ, test_occ;
  for (const auto& occ : occurrences)
    (train_docs.count(occ.doc_id) ? train_occ : test_occ).push_back(occ);

  const std::size_t window_length = 2 * 20 + 1;
  const Vocabulary vocab = fit_vocabulary(train_occ, 20000);
  const auto train_enc = encode_windows(train_occ, vocab, window_length);
  const auto test_enc = encode_windows(test_occ, vocab, window_length);

  CnnConfig config;  // stock architecture: 64-dim embedding, 64 filters, width-2 kernel
  config.seed = 0x51917ull;
  const CnnModel<double> model = train(config, train_enc, vocab);

  std::vector<ScoredOccurrence> scored;
  std::unordered_map<std::string, bool> truth;
  for (std::size_t i = 0; i < test_occ.size(); ++i) {
    scored.push_back({test_occ[i].doc_id, score_window(model, test_enc[i])});
    truth[test_occ[i].doc_id] = corpus.find(test_occ[i].doc_id)->privileged;
  }
  const auto docs = score_documents(scored, truth);
  std::vector<ScoredItem> items;
  for (const auto& d : docs) items.push_back({d.score, d.truth});

  const double cnn_precision = precision_at_recall(items, 0.75).precision;
  const double baseline = keyword_baseline_precision(items);

  Outcome out;
  out.pass = cnn_precision >= baseline + kPrecisionLift;
  out.detail = "document precision@75% recall " + fmt_double(cnn_precision) + " vs keyword baseline " +
               fmt_double(baseline) + " (lift " + fmt_double(cnn_precision - baseline) +
               ", required 0.20) on " + std::to_string(items.size()) + " test documents";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 6: neighbor cleaning of disguised negatives does not hurt test
// PR-AUC.

Occurrence synthetic_window(Rng& rng, const std::vector<std::string>& pool, Label label,
                            std::size_t serial) {
  Occurrence occ;
  occ.doc_id = "w" + std::to_string(serial);
  occ.keyword = KeywordPattern::parse("privilege");
  occ.window_begin = 0;
  occ.center_index = 7;
  occ.label = label;
  for (int i = 0; i < 15; ++i)
    occ.window.push_back(i == 7 ? "privilege" : pool[rng.below(pool.size())]);
  return occ;
}

Outcome criterion_noise_cleaning() {
  const std::vector<std::string> planted = {"counsel", "attorney", "opinion", "retention",
                                            "strategy", "litigation", "memorandum", "draft",
                                            "confidential", "advice", "settlement", "review"};
  const std::vector<std::string> background = {"meeting", "schedule", "invoice", "quarter",
                                               "budget", "shipment", "order", "vendor",
                                               "payment", "travel", "agenda", "forecast"};
  Rng rng(0xacce5506ull);
  std::size_t serial = 0;

  // 30% of the candidate positives are true negatives in disguise.
  std::vector<Occurrence> candidates, negatives;
  for (int i = 0; i < 119; ++i)
    candidates.push_back(synthetic_window(rng, planted, Label::candidate_positive, serial++));
  for (int i = 0; i < 51; ++i)
    candidates.push_back(synthetic_window(rng, background, Label::candidate_positive, serial++));
  for (int i = 0; i < 170; ++i)
    negatives.push_back(synthetic_window(rng, background, Label::negative, serial++));

  std::vector<Occurrence> clean_test;
  for (int i = 0; i < 80; ++i)
    clean_test.push_back(synthetic_window(rng, planted, Label::candidate_positive, serial++));
  for (int i = 0; i < 120; ++i)
    clean_test.push_back(synthetic_window(rng, background, Label::negative, serial++));

  std::vector<Occurrence> train_all = candidates;
  train_all.insert(train_all.end(), negatives.begin(), negatives.end());

  const Vocabulary vocab = fit_vocabulary(train_all, 200);
  const std::size_t window_length = 15;

  CnnConfig config;
  config.embed_dim = 16;
  config.n_filters = 16;
  config.dropout_rate = 0.0;
  config.epochs = 8;
  config.learning_rate = 5e-3;
  config.batch_size = 16;
  config.seed = 0xc1ea7ull;

  const auto score_set = [&](const CnnModel<double>& model) {
    std::vector<ScoredItem> items;
    for (const auto& occ : clean_test)
      items.push_back({score_window(model, encode_window(occ, vocab, window_length)),
                       occ.label == Label::candidate_positive});
    return pr_auc(curves(items));
  };

  const auto model_all = train(config, encode_windows(train_all, vocab, window_length), vocab);
  const double auc_all = score_set(model_all);

  // Clean with approach one at the stock cutoff, then retrain.
  const BowSpace space = fit_bow_space(train_all, 100);
  const auto cand_vecs = bow_vectorize(candidates, space);
  const auto neg_vecs = bow_vectorize(negatives, space);
  const auto scores = score_candidates_v1(cand_vecs, neg_vecs, 3);
  const Selection kept = select(scores, 0.7);

  std::vector<Occurrence> cleaned;
  for (std::size_t idx : kept.selected) cleaned.push_back(candidates[idx]);
  const std::size_t kept_positives = cleaned.size();
  cleaned.insert(cleaned.end(), negatives.begin(), negatives.end());

  const auto model_clean = train(config, encode_windows(cleaned, vocab, window_length), vocab);
  const double auc_clean = score_set(model_clean);

  Outcome out;
  out.pass = auc_clean >= auc_all - kCleaningSlack;
  out.detail = "PR-AUC cleaned " + fmt_double(auc_clean) + " vs all-candidates " + fmt_double(auc_all) +
               " (margin 0.01); cleaning kept " + std::to_string(kept_positives) + "/170 candidates";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 7: two full pipeline runs with one RunConfig are byte-identical.

std::map<std::string, std::string> snapshot_dir(const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    files[std::filesystem::relative(entry.path(), root).generic_string()] = body.str();
  }
  return files;
}

Outcome criterion_determinism() {
  const auto scratch =
      std::filesystem::temp_directory_path() / ("kwic_accept_" + std::to_string(::getpid()));
  std::filesystem::remove_all(scratch);
  std::filesystem::create_directories(scratch);

  const std::string spec_path = (scratch / "spec.json").string();
  const std::string corpus_path = (scratch / "corpus.jsonl").string();
  {
    std::ofstream spec(spec_path);
    spec << R"({
  "n_docs": 260,
  "privileged_fraction": 0.25,
  "keywords": ["legal", "privi*"],
  "footer_probability": 0.3,
  "planted_context_vocab": ["counsel", "attorney", "opinion", "retention", "advice", "work", "product", "matter"],
  "background_vocab": ["meeting", "invoice", "quarter", "budget", "vendor", "agenda", "shipment", "order"],
  "seed": 77
})";
  }
  cmd_synth(spec_path, corpus_path);

  RunConfig config;
  config.corpus_path = corpus_path;
  config.keywords = {KeywordPattern::parse("legal"), KeywordPattern::parse("privi*")};
  config.window_radius = 6;
  config.vocab_size = 1000;
  config.bow_features = 200;
  config.cnn.embed_dim = 12;
  config.cnn.n_filters = 12;
  config.cnn.dropout_rate = 0.1;
  config.cnn.epochs = 3;
  config.cnn.learning_rate = 5e-3;
  config.cnn.batch_size = 32;
  config.folds = 3;
  config.output_dir = (scratch / "out").string();
  config.seed = 99;
  config.validate();

  const auto run_all = [&]() {
    cmd_extract(config);
    cmd_select(config);
    cmd_train(config, Algorithm::cnn, false);
    cmd_train(config, Algorithm::logistic, false);
    cmd_evaluate(config, {Algorithm::cnn, Algorithm::logistic});
    cmd_report(config);
  };

  run_all();
  const auto first = snapshot_dir(config.output_dir);
  std::filesystem::remove_all(config.output_dir);
  run_all();
  const auto second = snapshot_dir(config.output_dir);
  std::filesystem::remove_all(scratch);

  Outcome out;
  if (first.size() != second.size() || first.empty()) {
    out.pass = false;
    out.detail = "output file sets differ (" + std::to_string(first.size()) + " vs " +
                 std::to_string(second.size()) + ")";
    return out;
  }
  for (const auto& [path, bytes] : first) {
    const auto it = second.find(path);
    if (it == second.end() || it->second != bytes)
      return {false, "file differs between runs: " + path};
  }
  out.pass = true;
  out.detail = std::to_string(first.size()) +
               " output files (occurrences, selections, models, tables, reports) byte-identical";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 8: five-fold cross-validation emits per-fold and averaged rows
// at recall targets 75/85/90 and the averages sit inside the fold envelope.

Outcome criterion_fold_protocol() {
  const std::vector<std::string> planted = {"counsel", "attorney", "opinion", "retention",
                                            "strategy", "litigation"};
  const std::vector<std::string> background = {"meeting", "invoice", "quarter", "budget",
                                               "vendor", "agenda"};
  Rng rng(0xacce5508ull);
  std::size_t serial = 0;
  std::vector<Occurrence> occurrences;
  for (int i = 0; i < 160; ++i)
    occurrences.push_back(synthetic_window(rng, planted, Label::candidate_positive, serial++));
  for (int i = 0; i < 240; ++i)
    occurrences.push_back(synthetic_window(rng, background, Label::negative, serial++));

  const BowSpace space = fit_bow_space(occurrences, 100);
  struct Item {
    BowVector features;
    bool positive;
  };
  std::vector<Item> items;
  std::vector<bool> labels;
  for (const auto& occ : occurrences) {
    items.push_back({bow_vectorize(occ, space), occ.label == Label::candidate_positive});
    labels.push_back(occ.label == Label::candidate_positive);
  }

  const std::vector<double> targets = {0.75, 0.85, 0.90};
  const FoldPlan plan = make_fold_plan(labels, 5, 0xf01d5ull);
  const auto cv = crossvalidate(
      items, plan, [](const Item& it) { return it.positive; },
      [](const std::vector<Item>& train_items) {
        std::vector<BowExample> examples;
        for (const auto& it : train_items) examples.push_back({it.features, it.positive});
        LinearConfig config;
        config.learning_rate = 0.05;
        config.epochs = 60;
        config.seed = 0x11395ull;
        const LinearModel model = train_logistic(examples, config);
        return [model](const Item& it) { return predict_score(model, it.features); };
      },
      EvalLevel::occurrence, targets);

  if (cv.folds.size() != 5) return {false, "expected 5 fold reports, got " + std::to_string(cv.folds.size())};

  std::vector<bool> seen(items.size(), false);
  for (const auto& fs : cv.fold_scores)
    for (std::size_t idx : fs.item_indices) {
      if (idx >= seen.size() || seen[idx]) return {false, "out-of-fold scores do not cover each item once"};
      seen[idx] = true;
    }
  for (bool b : seen)
    if (!b) return {false, "out-of-fold scores do not cover each item once"};

  const auto row_fields = [](const MetricRow& r) {
    return std::vector<double>{r.threshold, r.precision, r.recall, r.savings, r.reviewed_fraction};
  };
  for (const auto& fold : cv.folds) {
    if (fold.rows.size() != targets.size()) return {false, "fold table misses a recall target row"};
    for (std::size_t t = 0; t < targets.size(); ++t)
      if (fold.rows[t].target != targets[t]) return {false, "fold table row targets out of order"};
  }
  if (cv.averaged.rows.size() != targets.size()) return {false, "averaged table misses a recall target row"};

  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (cv.averaged.rows[t].target != targets[t]) return {false, "averaged row targets out of order"};
    const auto avg = row_fields(cv.averaged.rows[t]);
    for (std::size_t f = 0; f < avg.size(); ++f) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& fold : cv.folds) {
        const double v = row_fields(fold.rows[t])[f];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (avg[f] < lo - kEnvelopeEps || avg[f] > hi + kEnvelopeEps)
        return {false, "averaged metric escapes the per-fold envelope"};
    }
  }

  return {true, "5 folds x 3 recall targets (75/85/90), averages inside per-fold envelopes"};
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    double budget_seconds;  // 0 means no explicit budget
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"gradient correctness", kGradTimeBudget, criterion_gradients},
      {"knn score equivalence", kKnnTimeBudget, criterion_knn_equivalence},
      {"selection sweep monotonicity", 0.0, criterion_selection_monotone},
      {"threshold sweep contracts", 0.0, criterion_threshold_contracts},
      {"end-to-end signal recovery", kSignalTimeBudget, criterion_signal_recovery},
      {"noisy-positive cleaning", 0.0, criterion_noise_cleaning},
      {"pipeline determinism", 0.0, criterion_determinism},
      {"five-fold protocol", 0.0, criterion_fold_protocol},
  };

  int failures = 0;
  int index = 0;
  for (const auto& entry : entries) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = entry.fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (entry.budget_seconds > 0.0 && elapsed > entry.budget_seconds) {
      out.pass = false;
      out.detail += " [exceeded " + fmt_double(entry.budget_seconds) + "s budget]";
    }
    if (!out.pass) ++failures;
    std::printf("[%s] criterion %d/8 %-30s (%.1fs) %s\n", out.pass ? "PASS" : "FAIL", index,
                entry.name, elapsed, out.detail.c_str());
    std::fflush(stdout);
  }

  if (failures == 0)
    std::printf("acceptance: all 8 criteria passed\n");
  else
    std::printf("acceptance: %d of 8 criteria FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
