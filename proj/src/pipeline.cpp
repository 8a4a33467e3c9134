#include "kwic/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "kwic/model_io.hpp"
#include "kwic/rng.hpp"
#include "kwic/vectorize.hpp"

namespace kwic {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a_str(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// Every keyword gets its own seed stream so adding a keyword to the config
// never changes another keyword's models.
std::uint64_t keyword_seed(const RunConfig& config, const KeywordPattern& kw) {
  return derive_seed(config.seed, fnv1a_str(kw.slug()));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Commands buffer every output and write only after all computation has
// succeeded, so a validation failure never leaves partial files behind.
struct PendingOutputs {
  std::vector<std::pair<std::string, std::string>> files;

  void add(const std::string& path, std::string content) {
    files.emplace_back(path, std::move(content));
  }

  void flush(const std::string& output_dir) const {
    fs::create_directories(output_dir);
    for (const auto& [path, content] : files) {
      std::ofstream out(path, std::ios::trunc | std::ios::binary);
      if (!out) throw ValidationError("cannot open output file for writing: " + path);
      out << content;
      if (!out) throw ValidationError("failed writing output file: " + path);
    }
  }
};

std::string occurrences_to_text(const std::vector<Occurrence>& occurrences) {
  std::ostringstream out;
  for (const auto& occ : occurrences) {
    json rec{
        {"doc_id", occ.doc_id},
        {"keyword", occ.keyword.written()},
        {"center_index", occ.center_index},
        {"window_begin", occ.window_begin},
        {"window", occ.window},
        {"label", occ.label == Label::candidate_positive ? 1 : 0},
        {"in_footer", occ.in_footer},
    };
    out << rec.dump() << '\n';
  }
  return out.str();
}

json report_to_json(const MetricsReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"target", r.target},
                    {"threshold", r.threshold},
                    {"precision", r.precision},
                    {"recall", r.recall},
                    {"savings", r.savings},
                    {"reviewed_fraction", r.reviewed_fraction}});
  json roc = json::array();
  for (const auto& p : report.curve_points.roc) roc.push_back({p.threshold, p.fpr, p.tpr});
  json pr = json::array();
  for (const auto& p : report.curve_points.pr) pr.push_back({p.threshold, p.recall, p.precision});
  return {{"level", report.level == EvalLevel::document ? "document" : "occurrence"},
          {"keyword_baseline", report.keyword_baseline},
          {"rows", rows},
          {"roc", roc},
          {"pr", pr}};
}

std::string metrics_table(const std::vector<MetricsReport>& folds, const MetricsReport& averaged) {
  std::ostringstream out;
  out << "scope\ttarget\tthreshold\tprecision\trecall\tsavings\treviewed_fraction\tkeyword_baseline\n";
  auto emit = [&out](const std::string& scope, const MetricsReport& r) {
    for (const auto& row : r.rows)
      out << scope << '\t' << fmt(row.target) << '\t' << fmt(row.threshold) << '\t'
          << fmt(row.precision) << '\t' << fmt(row.recall) << '\t' << fmt(row.savings) << '\t'
          << fmt(row.reviewed_fraction) << '\t' << fmt(r.keyword_baseline) << '\n';
  };
  for (std::size_t f = 0; f < folds.size(); ++f) emit("fold" + std::to_string(f), folds[f]);
  emit("average", averaged);
  return out.str();
}

std::string roc_table(const Curves& c) {
  std::ostringstream out;
  out << "threshold\tfpr\ttpr\n";
  for (const auto& p : c.roc)
    out << fmt(p.threshold) << '\t' << fmt(p.fpr) << '\t' << fmt(p.tpr) << '\n';
  return out.str();
}

std::string pr_table(const Curves& c) {
  std::ostringstream out;
  out << "threshold\trecall\tprecision\n";
  for (const auto& p : c.pr)
    out << fmt(p.threshold) << '\t' << fmt(p.recall) << '\t' << fmt(p.precision) << '\n';
  return out.str();
}

std::vector<Occurrence> load_keyword_occurrences(const RunConfig& config,
                                                 const KeywordPattern& kw, bool use_selected) {
  const std::string path =
      use_selected ? selected_path(config, kw) : occurrences_path(config, kw);
  if (!fs::exists(path))
    throw ValidationError("missing occurrence file " + path + "; run " +
                          (use_selected ? std::string("select") : std::string("extract")) +
                          " first");
  return load_occurrences(path);
}

std::unordered_map<std::string, bool> truth_map(const Corpus& corpus) {
  std::unordered_map<std::string, bool> truth;
  for (const auto& d : corpus.documents) truth.emplace(d.id, d.privileged);
  return truth;
}

std::vector<BowExample> to_examples(const std::vector<Occurrence>& occurrences,
                                    const BowSpace& space) {
  std::vector<BowExample> examples;
  examples.reserve(occurrences.size());
  for (const auto& occ : occurrences)
    examples.push_back({bow_vectorize(occ, space), occ.label == Label::candidate_positive});
  return examples;
}

// Scoring closure factory for one cross-validation fold.
std::function<double(const Occurrence&)> fold_trainer(const RunConfig& config,
                                                      Algorithm algorithm, std::uint64_t seed,
                                                      const std::vector<Occurrence>& train_items) {
  if (algorithm == Algorithm::cnn) {
    const std::size_t L = 2 * static_cast<std::size_t>(config.window_radius) + 1;
    auto vocab = std::make_shared<Vocabulary>(fit_vocabulary(train_items, config.vocab_size));
    CnnConfig cc = config.cnn;
    cc.seed = seed;
    auto model = std::make_shared<CnnModel<double>>(
        train(cc, encode_windows(train_items, *vocab, L), *vocab));
    return [model, vocab, L](const Occurrence& occ) {
      return score_window(*model, encode_window(occ, *vocab, L));
    };
  }
  auto space = std::make_shared<BowSpace>(fit_bow_space(train_items, config.bow_features));
  LinearConfig lc = config.linear;
  lc.seed = seed;
  const auto examples = to_examples(train_items, *space);
  auto model = std::make_shared<LinearModel>(algorithm == Algorithm::svm
                                                 ? train_svm(examples, lc)
                                                 : train_logistic(examples, lc));
  return [model, space](const Occurrence& occ) {
    return predict_score(*model, bow_vectorize(occ, *space));
  };
}

// Fold assignment by document, so no document's occurrences straddle a
// train/test boundary.
FoldPlan document_fold_plan(const std::vector<Occurrence>& occurrences,
                            const std::unordered_map<std::string, bool>& truth, int k,
                            std::uint64_t seed) {
  std::vector<std::string> doc_order;
  std::unordered_map<std::string, std::size_t> doc_index;
  std::vector<bool> doc_labels;
  for (const auto& occ : occurrences) {
    auto it = truth.find(occ.doc_id);
    if (it == truth.end())
      throw ValidationError("occurrence references unknown document: " + occ.doc_id);
    if (doc_index.emplace(occ.doc_id, doc_order.size()).second) {
      doc_order.push_back(occ.doc_id);
      doc_labels.push_back(it->second);
    }
  }
  const FoldPlan doc_plan = make_fold_plan(doc_labels, k, seed);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.reserve(occurrences.size());
  for (const auto& occ : occurrences)
    plan.assignment.push_back(doc_plan.assignment[doc_index.at(occ.doc_id)]);
  return plan;
}

}  // namespace

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "cnn") return Algorithm::cnn;
  if (name == "logistic") return Algorithm::logistic;
  if (name == "svm") return Algorithm::svm;
  throw ValidationError("unknown algorithm: " + name + " (expected cnn, logistic or svm)");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::cnn: return "cnn";
    case Algorithm::logistic: return "logistic";
    case Algorithm::svm: return "svm";
  }
  throw ValidationError("unknown algorithm value");
}

std::vector<std::string> default_footer_markers() {
  return {"this email may contain", "confidentiality notice", "privileged and confidential",
          "attorney-client communication", "do not distribute"};
}

void RunConfig::validate() const {
  if (corpus_path.empty()) throw ValidationError("corpus path is empty");
  if (!fs::exists(corpus_path)) throw ValidationError("corpus file does not exist: " + corpus_path);
  if (keywords.empty()) throw ValidationError("no keywords configured");
  if (window_radius < 1) throw ValidationError("window radius must be at least 1");
  if (vocab_size == 0) throw ValidationError("vocabulary size must be positive");
  if (bow_features == 0) throw ValidationError("feature count must be positive");
  if (footer_trailing_fraction <= 0.0 || footer_trailing_fraction > 1.0)
    throw ValidationError("footer trailing fraction must lie in (0,1]");
  if (detect_footers && footer_markers.empty())
    throw ValidationError("footer detection enabled without marker phrases");

  if (cnn.embed_dim < 1 || cnn.n_filters < 1 || cnn.kernel_size < 1)
    throw ValidationError("embed_dim, n_filters and kernel_size must be positive");
  if (cnn.kernel_size > 2 * window_radius + 1)
    throw ValidationError("kernel size exceeds the window sequence length");
  if (cnn.dropout_rate < 0.0 || cnn.dropout_rate >= 1.0)
    throw ValidationError("dropout_rate must lie in [0,1)");
  if (cnn.epochs < 1 || cnn.batch_size < 1 || cnn.learning_rate <= 0.0)
    throw ValidationError("cnn epochs, batch size and learning rate must be positive");
  if (grid_enabled) {
    if (grid.dropout_candidates.empty() || grid.epoch_candidates.empty())
      throw ValidationError("grid search needs dropout and epoch candidates");
    if (grid.selection_recall <= 0.0 || grid.selection_recall > 1.0)
      throw ValidationError("grid selection recall must lie in (0,1]");
  }
  if (linear.learning_rate <= 0.0 || linear.epochs < 1 || linear.regularization < 0.0)
    throw ValidationError("linear baseline settings are out of range");

  if (selection.k < 1) throw ValidationError("neighbor count must be at least 1");
  if (selection.cutoff <= 0.0) throw ValidationError("selection cutoff must be positive");
  if (selection.approach == Approach::one && selection.cutoff > 1.0)
    throw ValidationError("approach-one cutoff cannot exceed 1");
  if (selection_sweep.empty()) throw ValidationError("selection sweep is empty");
  for (double c : selection_sweep) {
    if (c <= 0.0) throw ValidationError("sweep cutoff must be positive");
    if (selection.approach == Approach::one && c > 1.0)
      throw ValidationError("approach-one sweep cutoff cannot exceed 1");
  }

  if (folds < 2) throw ValidationError("fold count must be at least 2");
  if (recall_targets.empty()) throw ValidationError("no recall targets configured");
  for (double t : recall_targets)
    if (t <= 0.0 || t > 1.0) throw ValidationError("recall target must lie in (0,1]");
  if (output_dir.empty()) throw ValidationError("output directory is empty");
}

namespace {

json parse_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ValidationError(std::string("cannot open ") + what + " file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + " file is not valid JSON: " + path + ": " + e.what());
  }
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ValidationError(std::string("unknown ") + what + " field: " + it.key());
}

template <typename T>
void read_field(const json& j, const char* key, T& value) {
  if (!j.contains(key)) return;
  try {
    value = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config field ") + key + " has the wrong type: " + e.what());
  }
}

std::vector<KeywordPattern> parse_keywords(const json& j, const char* key) {
  std::vector<KeywordPattern> keywords;
  if (!j.contains(key)) return keywords;
  if (!j.at(key).is_array()) throw ValidationError(std::string(key) + " must be a list");
  for (const auto& item : j.at(key)) {
    if (!item.is_string()) throw ValidationError(std::string(key) + " entries must be strings");
    keywords.push_back(KeywordPattern::parse(item.get<std::string>()));
  }
  return keywords;
}

Approach parse_approach(const json& v) {
  if (v.is_number_integer()) {
    const int a = v.get<int>();
    if (a == 1) return Approach::one;
    if (a == 2) return Approach::two;
  } else if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "one" || s == "1") return Approach::one;
    if (s == "two" || s == "2") return Approach::two;
  }
  throw ValidationError("selection approach must be 1/\"one\" or 2/\"two\"");
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  const json j = parse_json_file(path, "config");
  if (!j.is_object()) throw ValidationError("config file must hold a JSON object: " + path);
  reject_unknown_keys(
      j,
      {"corpus", "keywords", "window_radius", "vocab_size", "bow_features",
       "drop_footer_in_privileged", "detect_footers", "footer_markers",
       "footer_trailing_fraction", "cnn", "grid", "linear", "selection", "selection_sweep",
       "folds", "recall_targets", "output_dir", "seed"},
      "config");

  RunConfig config;
  read_field(j, "corpus", config.corpus_path);
  config.keywords = parse_keywords(j, "keywords");
  read_field(j, "window_radius", config.window_radius);
  read_field(j, "vocab_size", config.vocab_size);
  read_field(j, "bow_features", config.bow_features);
  read_field(j, "drop_footer_in_privileged", config.drop_footer_in_privileged);
  read_field(j, "detect_footers", config.detect_footers);
  read_field(j, "footer_markers", config.footer_markers);
  read_field(j, "footer_trailing_fraction", config.footer_trailing_fraction);

  if (j.contains("cnn")) {
    const auto& c = j.at("cnn");
    reject_unknown_keys(c,
                        {"embed_dim", "n_filters", "kernel_size", "dropout_rate", "epochs",
                         "learning_rate", "batch_size"},
                        "cnn");
    read_field(c, "embed_dim", config.cnn.embed_dim);
    read_field(c, "n_filters", config.cnn.n_filters);
    read_field(c, "kernel_size", config.cnn.kernel_size);
    read_field(c, "dropout_rate", config.cnn.dropout_rate);
    read_field(c, "epochs", config.cnn.epochs);
    read_field(c, "learning_rate", config.cnn.learning_rate);
    read_field(c, "batch_size", config.cnn.batch_size);
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    reject_unknown_keys(g, {"enabled", "dropout_candidates", "epoch_candidates", "selection_recall"},
                        "grid");
    read_field(g, "enabled", config.grid_enabled);
    read_field(g, "dropout_candidates", config.grid.dropout_candidates);
    read_field(g, "epoch_candidates", config.grid.epoch_candidates);
    read_field(g, "selection_recall", config.grid.selection_recall);
  }
  if (j.contains("linear")) {
    const auto& l = j.at("linear");
    reject_unknown_keys(l, {"learning_rate", "epochs", "regularization"}, "linear");
    read_field(l, "learning_rate", config.linear.learning_rate);
    read_field(l, "epochs", config.linear.epochs);
    read_field(l, "regularization", config.linear.regularization);
  }
  if (j.contains("selection")) {
    const auto& s = j.at("selection");
    reject_unknown_keys(s, {"k", "cutoff", "approach"}, "selection");
    read_field(s, "k", config.selection.k);
    read_field(s, "cutoff", config.selection.cutoff);
    if (s.contains("approach")) config.selection.approach = parse_approach(s.at("approach"));
  }
  read_field(j, "selection_sweep", config.selection_sweep);
  read_field(j, "folds", config.folds);
  read_field(j, "recall_targets", config.recall_targets);
  read_field(j, "output_dir", config.output_dir);
  read_field(j, "seed", config.seed);
  return config;
}

SynthSpec load_synth_spec(const std::string& path) {
  const json j = parse_json_file(path, "synthetic corpus spec");
  if (!j.is_object())
    throw ValidationError("synthetic corpus spec must hold a JSON object: " + path);
  reject_unknown_keys(j,
                      {"n_docs", "privileged_fraction", "keywords", "footer_probability",
                       "planted_context_vocab", "background_vocab", "seed"},
                      "synthetic corpus spec");
  SynthSpec spec;
  read_field(j, "n_docs", spec.n_docs);
  read_field(j, "privileged_fraction", spec.privileged_fraction);
  spec.keywords = parse_keywords(j, "keywords");
  read_field(j, "footer_probability", spec.footer_probability);
  read_field(j, "planted_context_vocab", spec.planted_context_vocab);
  read_field(j, "background_vocab", spec.background_vocab);
  read_field(j, "seed", spec.seed);
  return spec;
}

std::string occurrences_path(const RunConfig& config, const KeywordPattern& kw) {
  return config.output_dir + "/occurrences_" + kw.slug() + ".jsonl";
}

std::string selected_path(const RunConfig& config, const KeywordPattern& kw) {
  return config.output_dir + "/selected_" + kw.slug() + ".jsonl";
}

std::string model_path(const RunConfig& config, const KeywordPattern& kw, Algorithm a) {
  return config.output_dir + "/model_" + kw.slug() + "_" + algorithm_name(a) + ".bin";
}

std::string vocab_path(const RunConfig& config, const KeywordPattern& kw) {
  return config.output_dir + "/vocab_" + kw.slug() + ".txt";
}

std::string bow_space_path(const RunConfig& config, const KeywordPattern& kw) {
  return config.output_dir + "/bow_" + kw.slug() + ".txt";
}

void cmd_synth(const std::string& spec_path, const std::string& out_path) {
  const SynthSpec spec = load_synth_spec(spec_path);
  const Corpus corpus = generate_synthetic(spec);
  if (out_path.empty()) throw ValidationError("output corpus path is empty");
  const auto parent = fs::path(out_path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  write_corpus(corpus, out_path);
}

void cmd_extract(const RunConfig& config) {
  config.validate();
  Corpus corpus = load_corpus(config.corpus_path);

  if (config.detect_footers) {
    for (auto& doc : corpus.documents)
      if (!doc.footer_start)
        doc.footer_start =
            detect_footer(doc, config.footer_markers, config.footer_trailing_fraction);
  }

  PendingOutputs pending;
  std::ostringstream summary;
  summary << "keyword\toccurrences\tpct_positive\tdocuments\tpct_positive_documents\n";
  for (const auto& kw : config.keywords) {
    std::vector<Occurrence> all;
    for (const auto& doc : corpus.documents) {
      auto occs = extract_occurrences(doc, kw, config.window_radius);
      all.insert(all.end(), std::make_move_iterator(occs.begin()),
                 std::make_move_iterator(occs.end()));
    }
    const auto labeled = derive_labels(corpus, all, config.drop_footer_in_privileged);

    std::size_t positives = 0;
    std::vector<std::string> doc_order;
    std::unordered_map<std::string, bool> doc_positive;
    for (const auto& occ : labeled) {
      if (occ.label == Label::candidate_positive) ++positives;
      if (doc_positive.emplace(occ.doc_id, false).second) doc_order.push_back(occ.doc_id);
    }
    std::size_t positive_docs = 0;
    for (const auto& id : doc_order)
      if (corpus.find(id)->privileged) ++positive_docs;

    const double pct_pos =
        labeled.empty() ? 0.0 : 100.0 * static_cast<double>(positives) / static_cast<double>(labeled.size());
    const double pct_pos_docs =
        doc_order.empty() ? 0.0
                          : 100.0 * static_cast<double>(positive_docs) / static_cast<double>(doc_order.size());
    summary << kw.written() << '\t' << labeled.size() << '\t' << fmt(pct_pos) << '\t'
            << doc_order.size() << '\t' << fmt(pct_pos_docs) << '\n';

    pending.add(occurrences_path(config, kw), occurrences_to_text(labeled));
  }
  pending.add(config.output_dir + "/extract_summary.tsv", summary.str());
  pending.flush(config.output_dir);
}

void cmd_select(const RunConfig& config) {
  config.validate();
  PendingOutputs pending;

  for (const auto& kw : config.keywords) {
    const auto occurrences = load_keyword_occurrences(config, kw, false);

    std::vector<std::size_t> candidate_idx;
    std::vector<Occurrence> negatives_occ;
    for (std::size_t i = 0; i < occurrences.size(); ++i) {
      if (occurrences[i].label == Label::candidate_positive)
        candidate_idx.push_back(i);
      else
        negatives_occ.push_back(occurrences[i]);
    }
    if (candidate_idx.empty())
      throw ValidationError("keyword " + kw.written() + " has no candidate positives to select");

    // One shared feature space over all of the keyword's occurrences; the
    // cleaning step runs before any train/test split exists.
    std::vector<Occurrence> all = occurrences;
    const BowSpace space = fit_bow_space(all, config.bow_features);
    std::vector<BowVector> candidates;
    candidates.reserve(candidate_idx.size());
    for (std::size_t i : candidate_idx) candidates.push_back(bow_vectorize(occurrences[i], space));
    const std::vector<BowVector> negatives = bow_vectorize(negatives_occ, space);

    const auto scores = config.selection.approach == Approach::one
                            ? score_candidates_v1(candidates, negatives, config.selection.k)
                            : score_candidates_v2(candidates, negatives, config.selection.k);

    const Selection chosen = select(scores, config.selection.cutoff);

    // Filtered occurrence file: all negatives plus the selected candidates,
    // in original order.
    std::vector<bool> keep(occurrences.size(), false);
    for (std::size_t i = 0; i < occurrences.size(); ++i)
      if (occurrences[i].label == Label::negative) keep[i] = true;
    for (std::size_t s : chosen.selected) keep[candidate_idx[s]] = true;
    std::vector<Occurrence> filtered;
    for (std::size_t i = 0; i < occurrences.size(); ++i)
      if (keep[i]) filtered.push_back(occurrences[i]);

    std::ostringstream scored;
    scored << "doc_id\tcenter_index\tscore\tselected\n";
    {
      std::vector<bool> selected_mask(candidate_idx.size(), false);
      for (std::size_t s : chosen.selected) selected_mask[s] = true;
      for (std::size_t c = 0; c < candidate_idx.size(); ++c) {
        const auto& occ = occurrences[candidate_idx[c]];
        scored << occ.doc_id << '\t' << occ.center_index << '\t' << fmt(scores[c]) << '\t'
               << (selected_mask[c] ? 1 : 0) << '\n';
      }
    }

    std::ostringstream sweep;
    sweep << "cutoff\tselected_fraction\texcluded_fraction\n";
    for (double cutoff : config.selection_sweep) {
      const Selection at = select(scores, cutoff);
      sweep << fmt(cutoff) << '\t' << fmt(at.fraction) << '\t' << fmt(1.0 - at.fraction) << '\n';
    }

    const std::string approach_tag =
        config.selection.approach == Approach::one ? "v1" : "v2";
    pending.add(selected_path(config, kw), occurrences_to_text(filtered));
    pending.add(config.output_dir + "/scored_candidates_" + kw.slug() + "_" + approach_tag + ".tsv",
                scored.str());
    pending.add(config.output_dir + "/selection_report_" + kw.slug() + "_" + approach_tag + ".tsv",
                sweep.str());
  }
  pending.flush(config.output_dir);
}

void cmd_train(const RunConfig& config, Algorithm algorithm, bool use_selected) {
  config.validate();
  PendingOutputs pending;
  std::vector<std::pair<std::string, CnnModel<double>>> cnn_models;
  std::vector<std::pair<std::string, LinearModel>> linear_models;

  for (const auto& kw : config.keywords) {
    const auto occurrences = load_keyword_occurrences(config, kw, use_selected);
    if (occurrences.empty())
      throw ValidationError("keyword " + kw.written() + " has no occurrences to train on");
    const std::uint64_t kwseed = keyword_seed(config, kw);

    if (algorithm == Algorithm::cnn) {
      const std::size_t L = 2 * static_cast<std::size_t>(config.window_radius) + 1;
      const Vocabulary vocab = fit_vocabulary(occurrences, config.vocab_size);
      const auto encoded = encode_windows(occurrences, vocab, L);

      CnnConfig cc = config.cnn;
      cc.seed = derive_seed(kwseed, 0xc0deu);
      if (config.grid_enabled) {
        std::vector<bool> labels;
        labels.reserve(occurrences.size());
        for (const auto& occ : occurrences)
          labels.push_back(occ.label == Label::candidate_positive);
        const SplitIndices split = split_70_30(labels, derive_seed(kwseed, 0x9d1du));
        std::vector<EncodedWindow> grid_train, grid_val;
        for (std::size_t i : split.train) grid_train.push_back(encoded[i]);
        for (std::size_t i : split.test) grid_val.push_back(encoded[i]);
        const GridChoice choice = grid_search(config.grid, cc, grid_train, grid_val, vocab);
        cc.dropout_rate = choice.dropout_rate;
        cc.epochs = choice.epochs;
        std::ostringstream log;
        log << "dropout_rate\tepochs\tvalidation_precision\n"
            << fmt(choice.dropout_rate) << '\t' << choice.epochs << '\t' << fmt(choice.precision)
            << '\n';
        pending.add(config.output_dir + "/grid_" + kw.slug() + ".tsv", log.str());
      }

      cnn_models.emplace_back(model_path(config, kw, algorithm), train(cc, encoded, vocab));
      std::ostringstream vocab_text;
      for (const auto& t : vocab.tokens()) vocab_text << t << '\n';
      pending.add(vocab_path(config, kw), vocab_text.str());
    } else {
      const BowSpace space = fit_bow_space(occurrences, config.bow_features);
      LinearConfig lc = config.linear;
      lc.seed = derive_seed(kwseed, algorithm == Algorithm::svm ? 0x57a0u : 0x1091u);
      LinearModel model = algorithm == Algorithm::svm ? train_svm(to_examples(occurrences, space), lc)
                                                      : train_logistic(to_examples(occurrences, space), lc);
      model.feature_fingerprint = space.fingerprint();
      linear_models.emplace_back(model_path(config, kw, algorithm), std::move(model));
      std::ostringstream space_text;
      for (const auto& t : space.tokens()) space_text << t << '\n';
      pending.add(bow_space_path(config, kw), space_text.str());
    }
  }

  pending.flush(config.output_dir);
  for (const auto& [path, model] : cnn_models) save_cnn_model(model, path);
  for (const auto& [path, model] : linear_models) save_linear_model(model, path);
}

void cmd_evaluate(const RunConfig& config, const std::vector<Algorithm>& algorithms) {
  config.validate();
  if (algorithms.empty()) throw ValidationError("no algorithms requested for evaluation");
  const Corpus corpus = load_corpus(config.corpus_path);
  const auto truth = truth_map(corpus);

  PendingOutputs pending;
  json evaluation = json::object();

  for (const auto& kw : config.keywords) {
    const auto occurrences = load_keyword_occurrences(config, kw, false);
    if (occurrences.empty())
      throw ValidationError("keyword " + kw.written() + " has no occurrences to evaluate");
    const std::uint64_t kwseed = keyword_seed(config, kw);
    const FoldPlan plan =
        document_fold_plan(occurrences, truth, config.folds, derive_seed(kwseed, 0xcf01du));

    json kw_json = json::object();
    for (const Algorithm algorithm : algorithms) {
      int fold_counter = 0;
      auto trainer = [&](const std::vector<Occurrence>& train_items) {
        const std::uint64_t fold_seed = derive_seed(
            kwseed, 0xcf0000u + (static_cast<std::uint64_t>(algorithm) << 8) +
                        static_cast<std::uint64_t>(fold_counter));
        ++fold_counter;
        return fold_trainer(config, algorithm, fold_seed, train_items);
      };
      auto label_of = [](const Occurrence& occ) {
        return occ.label == Label::candidate_positive;
      };
      const CvResult cv = crossvalidate(occurrences, plan, label_of, trainer,
                                        EvalLevel::occurrence, config.recall_targets);

      // Document level reuses the out-of-fold occurrence scores; each
      // document sits in exactly one fold by construction of the plan.
      std::vector<MetricsReport> doc_folds;
      std::vector<ScoredItem> doc_pooled;
      for (const auto& fs : cv.fold_scores) {
        std::vector<ScoredOccurrence> occ_scores;
        occ_scores.reserve(fs.item_indices.size());
        for (std::size_t j = 0; j < fs.item_indices.size(); ++j)
          occ_scores.push_back({occurrences[fs.item_indices[j]].doc_id, fs.scores[j]});
        std::vector<ScoredItem> doc_items;
        for (const auto& ds : score_documents(occ_scores, truth))
          doc_items.push_back({ds.score, ds.truth});
        doc_pooled.insert(doc_pooled.end(), doc_items.begin(), doc_items.end());
        doc_folds.push_back(compute_metrics(doc_items, EvalLevel::document, config.recall_targets));
      }
      const MetricsReport doc_avg =
          average_reports(doc_folds, doc_pooled, EvalLevel::document, config.recall_targets);

      const std::string base =
          config.output_dir + "/" + kw.slug() + "_" + algorithm_name(algorithm);
      pending.add(base + "_occurrence_metrics.tsv", metrics_table(cv.folds, cv.averaged));
      pending.add(base + "_document_metrics.tsv", metrics_table(doc_folds, doc_avg));
      pending.add(base + "_occurrence_pr.tsv", pr_table(cv.averaged.curve_points));
      pending.add(base + "_occurrence_roc.tsv", roc_table(cv.averaged.curve_points));
      pending.add(base + "_document_pr.tsv", pr_table(doc_avg.curve_points));
      pending.add(base + "_document_roc.tsv", roc_table(doc_avg.curve_points));

      json algo_json;
      json occ_folds_json = json::array();
      for (const auto& f : cv.folds) occ_folds_json.push_back(report_to_json(f));
      json doc_folds_json = json::array();
      for (const auto& f : doc_folds) doc_folds_json.push_back(report_to_json(f));
      algo_json["occurrence"] = {{"folds", occ_folds_json}, {"average", report_to_json(cv.averaged)}};
      algo_json["document"] = {{"folds", doc_folds_json}, {"average", report_to_json(doc_avg)}};
      kw_json[algorithm_name(algorithm)] = std::move(algo_json);
    }
    evaluation[kw.slug()] = std::move(kw_json);
  }

  pending.add(config.output_dir + "/evaluation.json", evaluation.dump(2) + "\n");
  pending.flush(config.output_dir);
}

void cmd_report(const RunConfig& config) {
  config.validate();
  const std::string eval_path = config.output_dir + "/evaluation.json";
  if (!fs::exists(eval_path))
    throw ValidationError("missing " + eval_path + "; run evaluate first");
  const json evaluation = parse_json_file(eval_path, "evaluation");

  std::ostringstream out;
  out << "keyword\talgorithm\tlevel\ttarget\tprecision\trecall\tsavings\tkeyword_baseline\n";
  for (const auto& kw : config.keywords) {
    if (!evaluation.contains(kw.slug()))
      throw ValidationError("evaluation has no entry for keyword " + kw.written() +
                            "; rerun evaluate");
    const auto& kw_json = evaluation.at(kw.slug());
    for (auto it = kw_json.begin(); it != kw_json.end(); ++it) {
      for (const std::string level : {"occurrence", "document"}) {
        const auto& avg = it.value().at(level).at("average");
        const double baseline = avg.at("keyword_baseline").get<double>();
        for (const auto& row : avg.at("rows")) {
          out << kw.written() << '\t' << it.key() << '\t' << level << '\t'
              << fmt(row.at("target").get<double>()) << '\t'
              << fmt(row.at("precision").get<double>()) << '\t'
              << fmt(row.at("recall").get<double>()) << '\t'
              << fmt(row.at("savings").get<double>()) << '\t' << fmt(baseline) << '\n';
        }
      }
    }
  }
  PendingOutputs pending;
  pending.add(config.output_dir + "/report.tsv", out.str());
  pending.flush(config.output_dir);
}

}  // namespace kwic
