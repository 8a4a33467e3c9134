#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "kwic/error.hpp"

namespace kwic {

struct ScoredItem {
  double score = 0.0;
  bool positive = false;
};

struct PrecisionAtRecall {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t reviewed = 0;  // items scoring at or above the threshold
  std::size_t total = 0;
};

// Walks thresholds at each distinct score in descending order and returns
// the largest threshold whose recall meets the target; items scoring
// exactly at the threshold count as reviewed.
PrecisionAtRecall precision_at_recall(const std::vector<ScoredItem>& items, double target_recall);

// Precision of treating every keyword hit as privileged.
double keyword_baseline_precision(const std::vector<ScoredItem>& items);

struct SavingsResult {
  double savings = 0.0;
  double reviewed_fraction = 0.0;
  double threshold = 0.0;
};

// Fraction of items excluded from review at the precision_at_recall
// threshold; savings + reviewed_fraction is exactly 1.
SavingsResult savings(const std::vector<ScoredItem>& items, double target_recall);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double threshold = 0.0;
};

struct Curves {
  std::vector<RocPoint> roc;
  std::vector<PrPoint> pr;
};

// One point per distinct threshold, in descending threshold order.
Curves curves(const std::vector<ScoredItem>& items);

double roc_auc(const Curves& c);  // trapezoidal, anchored at (0,0)
double pr_auc(const Curves& c);   // step-interpolated average precision

struct ScoredOccurrence {
  std::string doc_id;
  double score = 0.0;
};

struct DocumentScore {
  std::string doc_id;
  double score = 0.0;
  bool truth = false;
};

// One entry per document with at least one scored occurrence, in first-seen
// order; the document score is the maximum occurrence score. Truth comes
// from the attorney labels.
std::vector<DocumentScore> score_documents(const std::vector<ScoredOccurrence>& occ_scores,
                                           const std::unordered_map<std::string, bool>& doc_truth);

// Stratified fold assignment: per label, fold sizes differ by at most one.
struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<int> assignment;  // item index -> fold in [0, k)
};

FoldPlan make_fold_plan(const std::vector<bool>& labels, int k, std::uint64_t seed);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded stratified 70/30 split; per-class sizes are within one item of the
// exact ratio.
SplitIndices split_70_30(const std::vector<bool>& labels, std::uint64_t seed);

enum class EvalLevel : std::uint8_t { occurrence = 0, document = 1 };

struct MetricRow {
  double target = 0.0;
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double savings = 0.0;
  double reviewed_fraction = 0.0;
};

struct MetricsReport {
  EvalLevel level = EvalLevel::occurrence;
  std::vector<MetricRow> rows;  // one per recall target
  double keyword_baseline = 0.0;
  Curves curve_points;
};

MetricsReport compute_metrics(const std::vector<ScoredItem>& items, EvalLevel level,
                              const std::vector<double>& recall_targets);

// Arithmetic mean of every scalar metric across fold reports; the curve
// points of the averaged report come from the pooled out-of-fold scores.
MetricsReport average_reports(const std::vector<MetricsReport>& folds,
                              const std::vector<ScoredItem>& pooled, EvalLevel level,
                              const std::vector<double>& recall_targets);

struct FoldScores {
  std::vector<std::size_t> item_indices;
  std::vector<double> scores;
};

struct CvResult {
  std::vector<MetricsReport> folds;
  MetricsReport averaged;
  std::vector<FoldScores> fold_scores;  // out-of-fold scores, reusable downstream
};

// Trains one model per fold on the remaining folds and evaluates it on the
// held-out fold. trainer(train_items) must return a scoring callable
// (const Item&) -> double; label_of(item) supplies the truth.
template <typename Item, typename LabelFn, typename TrainFn>
CvResult crossvalidate(const std::vector<Item>& items, const FoldPlan& plan, LabelFn&& label_of,
                       TrainFn&& trainer, EvalLevel level,
                       const std::vector<double>& recall_targets) {
  if (plan.assignment.size() != items.size())
    throw ValidationError("fold plan does not cover the item set");

  CvResult result;
  std::vector<ScoredItem> pooled;
  for (int fold = 0; fold < plan.k; ++fold) {
    std::vector<Item> train_items;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (plan.assignment[i] == fold)
        test_idx.push_back(i);
      else
        train_items.push_back(items[i]);
    }
    bool has_pos = false, has_neg = false;
    for (const auto& it : train_items) (label_of(it) ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
      throw ValidationError("fold " + std::to_string(fold) +
                            ": training portion does not contain both classes");

    auto scorer = trainer(train_items);
    FoldScores fs;
    std::vector<ScoredItem> scored;
    scored.reserve(test_idx.size());
    for (std::size_t i : test_idx) {
      const double s = scorer(items[i]);
      fs.item_indices.push_back(i);
      fs.scores.push_back(s);
      scored.push_back({s, label_of(items[i])});
      pooled.push_back(scored.back());
    }
    result.folds.push_back(compute_metrics(scored, level, recall_targets));
    result.fold_scores.push_back(std::move(fs));
  }
  result.averaged = average_reports(result.folds, pooled, level, recall_targets);
  return result;
}

}  // namespace kwic
