#include "kwic/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "kwic/rng.hpp"

namespace kwic {

namespace {

struct ThresholdStats {
  double threshold = 0.0;
  std::size_t tp = 0;  // cumulative true positives at score >= threshold
  std::size_t fp = 0;
};

// Cumulative confusion counts at every distinct score, descending.
std::vector<ThresholdStats> sweep(const std::vector<ScoredItem>& items) {
  std::vector<ScoredItem> sorted = items;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredItem& a, const ScoredItem& b) { return a.score > b.score; });
  std::vector<ThresholdStats> stats;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double t = sorted[i].score;
    while (i < sorted.size() && sorted[i].score == t) {
      if (sorted[i].positive)
        ++tp;
      else
        ++fp;
      ++i;
    }
    stats.push_back({t, tp, fp});
  }
  return stats;
}

void check_items(const std::vector<ScoredItem>& items) {
  if (items.empty()) throw ValidationError("no items to evaluate");
  bool has_pos = false, has_neg = false;
  for (const auto& it : items) {
    if (!std::isfinite(it.score)) throw ValidationError("item score is not finite");
    (it.positive ? has_pos : has_neg) = true;
  }
  if (!has_pos) throw ValidationError("item set has no positives");
  if (!has_neg) throw ValidationError("item set has no negatives");
}

}  // namespace

PrecisionAtRecall precision_at_recall(const std::vector<ScoredItem>& items,
                                      double target_recall) {
  check_items(items);
  if (target_recall <= 0.0 || target_recall > 1.0)
    throw ValidationError("recall target must lie in (0,1]");

  std::size_t total_pos = 0;
  for (const auto& it : items)
    if (it.positive) ++total_pos;

  // Thresholds descend, so the first one meeting the target is the largest.
  for (const auto& s : sweep(items)) {
    const double recall = static_cast<double>(s.tp) / static_cast<double>(total_pos);
    if (recall >= target_recall) {
      PrecisionAtRecall r;
      r.threshold = s.threshold;
      r.recall = recall;
      r.reviewed = s.tp + s.fp;
      r.total = items.size();
      r.precision = static_cast<double>(s.tp) / static_cast<double>(r.reviewed);
      return r;
    }
  }
  // recall reaches 1.0 at the lowest threshold, so this is unreachable for
  // valid targets; kept as a guard against NaN scores slipping through.
  throw ValidationError("recall target not reachable");
}

double keyword_baseline_precision(const std::vector<ScoredItem>& items) {
  // Unlike the threshold sweep this is well defined for single-class sets:
  // it reads only the labels.
  if (items.empty()) throw ValidationError("no items to evaluate");
  std::size_t pos = 0;
  for (const auto& it : items)
    if (it.positive) ++pos;
  return static_cast<double>(pos) / static_cast<double>(items.size());
}

SavingsResult savings(const std::vector<ScoredItem>& items, double target_recall) {
  const auto par = precision_at_recall(items, target_recall);
  SavingsResult r;
  r.threshold = par.threshold;
  r.reviewed_fraction = static_cast<double>(par.reviewed) / static_cast<double>(par.total);
  // Computing savings as 1.0 - f makes savings + f == 1.0 hold exactly in
  // IEEE arithmetic for any f in [0,1].
  r.savings = 1.0 - r.reviewed_fraction;
  return r;
}

Curves curves(const std::vector<ScoredItem>& items) {
  check_items(items);
  std::size_t total_pos = 0;
  for (const auto& it : items)
    if (it.positive) ++total_pos;
  const std::size_t total_neg = items.size() - total_pos;

  Curves c;
  for (const auto& s : sweep(items)) {
    RocPoint rp;
    rp.threshold = s.threshold;
    rp.tpr = static_cast<double>(s.tp) / static_cast<double>(total_pos);
    rp.fpr = static_cast<double>(s.fp) / static_cast<double>(total_neg);
    c.roc.push_back(rp);

    PrPoint pp;
    pp.threshold = s.threshold;
    pp.recall = rp.tpr;
    pp.precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
    c.pr.push_back(pp);
  }
  return c;
}

double roc_auc(const Curves& c) {
  if (c.roc.empty()) throw ValidationError("empty curve");
  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  for (const auto& p : c.roc) {
    auc += (p.fpr - prev_fpr) * (p.tpr + prev_tpr) * 0.5;
    prev_fpr = p.fpr;
    prev_tpr = p.tpr;
  }
  return auc;
}

double pr_auc(const Curves& c) {
  if (c.pr.empty()) throw ValidationError("empty curve");
  // Average precision: precision at each point weighted by recall gained.
  double auc = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : c.pr) {
    auc += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return auc;
}

std::vector<DocumentScore> score_documents(
    const std::vector<ScoredOccurrence>& occ_scores,
    const std::unordered_map<std::string, bool>& doc_truth) {
  std::vector<DocumentScore> docs;
  std::unordered_map<std::string, std::size_t> position;
  for (const auto& occ : occ_scores) {
    if (!std::isfinite(occ.score)) throw ValidationError("occurrence score is not finite");
    auto truth_it = doc_truth.find(occ.doc_id);
    if (truth_it == doc_truth.end())
      throw ValidationError("no truth label for document: " + occ.doc_id);
    auto [it, inserted] = position.emplace(occ.doc_id, docs.size());
    if (inserted) {
      docs.push_back({occ.doc_id, occ.score, truth_it->second});
    } else {
      auto& doc = docs[it->second];
      doc.score = std::max(doc.score, occ.score);
    }
  }
  return docs;
}

FoldPlan make_fold_plan(const std::vector<bool>& labels, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("fold count must be at least 2");
  if (labels.size() < static_cast<std::size_t>(k))
    throw ValidationError("fewer items than folds");

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.assign(labels.size(), -1);

  // Shuffle each class separately, then deal round-robin: per-class fold
  // sizes differ by at most one.
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (static_cast<int>(labels[i]) == cls) idx.push_back(i);
    Rng rng(derive_seed(seed, 0xf01d0000u + static_cast<std::uint64_t>(cls)));
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j)
      plan.assignment[idx[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  }
  return plan;
}

SplitIndices split_70_30(const std::vector<bool>& labels, std::uint64_t seed) {
  if (labels.size() < 10) throw ValidationError("need at least 10 items to split");
  bool has_pos = false, has_neg = false;
  for (bool l : labels) (l ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw ValidationError("split needs both classes present");

  SplitIndices out;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (static_cast<int>(labels[i]) == cls) idx.push_back(i);
    Rng rng(derive_seed(seed, 0x53110000u + static_cast<std::uint64_t>(cls)));
    rng.shuffle(idx);
    const auto n_train = static_cast<std::size_t>(
        std::llround(0.7 * static_cast<double>(idx.size())));
    for (std::size_t j = 0; j < idx.size(); ++j)
      (j < n_train ? out.train : out.test).push_back(idx[j]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  if (out.train.empty() || out.test.empty())
    throw ValidationError("split produced an empty side");
  return out;
}

MetricsReport compute_metrics(const std::vector<ScoredItem>& items, EvalLevel level,
                              const std::vector<double>& recall_targets) {
  if (recall_targets.empty()) throw ValidationError("no recall targets given");
  MetricsReport report;
  report.level = level;
  report.keyword_baseline = keyword_baseline_precision(items);
  report.curve_points = curves(items);
  for (double target : recall_targets) {
    const auto par = precision_at_recall(items, target);
    const auto sav = savings(items, target);
    MetricRow row;
    row.target = target;
    row.threshold = par.threshold;
    row.precision = par.precision;
    row.recall = par.recall;
    row.savings = sav.savings;
    row.reviewed_fraction = sav.reviewed_fraction;
    report.rows.push_back(row);
  }
  return report;
}

MetricsReport average_reports(const std::vector<MetricsReport>& folds,
                              const std::vector<ScoredItem>& pooled, EvalLevel level,
                              const std::vector<double>& recall_targets) {
  if (folds.empty()) throw ValidationError("no fold reports to average");
  for (const auto& f : folds)
    if (f.rows.size() != recall_targets.size())
      throw ValidationError("fold report does not match the recall targets");

  MetricsReport avg;
  avg.level = level;
  avg.curve_points = curves(pooled);
  const double inv = 1.0 / static_cast<double>(folds.size());
  for (const auto& f : folds) avg.keyword_baseline += f.keyword_baseline * inv;
  for (std::size_t r = 0; r < recall_targets.size(); ++r) {
    MetricRow row;
    row.target = recall_targets[r];
    for (const auto& f : folds) {
      row.threshold += f.rows[r].threshold * inv;
      row.precision += f.rows[r].precision * inv;
      row.recall += f.rows[r].recall * inv;
      row.savings += f.rows[r].savings * inv;
      row.reviewed_fraction += f.rows[r].reviewed_fraction * inv;
    }
    avg.rows.push_back(row);
  }
  return avg;
}

}  // namespace kwic
