#include "kwic/select.hpp"

#include <algorithm>
#include <limits>

#include "kwic/error.hpp"

namespace kwic {

namespace {

// Mean similarity of the k most similar pool vectors, skipping skip_index
// (pass the pool size to skip nothing). Sorting is by similarity descending
// with index ascending as the tie-break, and the mean is accumulated in
// that sort order so results are reproducible bit for bit.
double mean_top_k_similarity(const BowVector& query, const std::vector<BowVector>& pool,
                             int k, std::size_t skip_index) {
  std::vector<std::pair<double, std::size_t>> sims;
  sims.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i == skip_index) continue;
    sims.emplace_back(cosine(query, pool[i]), i);
  }
  const auto kk = static_cast<std::size_t>(k);
  auto by_sim_desc_index_asc = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(kk), sims.end(),
                    by_sim_desc_index_asc);
  double sum = 0.0;
  for (std::size_t i = 0; i < kk; ++i) sum += sims[i].first;
  return sum / static_cast<double>(kk);
}

void check_inputs(const std::vector<BowVector>& candidates,
                  const std::vector<BowVector>& negatives, int k) {
  if (k <= 0) throw ValidationError("neighbor count must be positive");
  if (candidates.empty()) throw ValidationError("no candidates to score");
  if (negatives.size() < static_cast<std::size_t>(k))
    throw ValidationError("need at least k negatives to score candidates");
  for (const auto& c : candidates)
    if (c.dimension != candidates.front().dimension)
      throw ValidationError("candidate vectors disagree on dimension");
  for (const auto& n : negatives)
    if (n.dimension != candidates.front().dimension)
      throw ValidationError("negative vectors disagree on dimension");
}

}  // namespace

std::vector<double> score_candidates_v1(const std::vector<BowVector>& candidates,
                                        const std::vector<BowVector>& negatives, int k) {
  check_inputs(candidates, negatives, k);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& cand : candidates)
    scores.push_back(mean_top_k_similarity(cand, negatives, k, negatives.size()));
  return scores;
}

std::vector<double> score_candidates_v2(const std::vector<BowVector>& candidates,
                                        const std::vector<BowVector>& negatives, int k) {
  check_inputs(candidates, negatives, k);
  if (candidates.size() < static_cast<std::size_t>(k) + 1)
    throw ValidationError("need at least k other candidates to score a candidate");
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double neg_mean = mean_top_k_similarity(candidates[i], negatives, k, negatives.size());
    const double cand_mean = mean_top_k_similarity(candidates[i], candidates, k, i);
    if (cand_mean == 0.0) {
      // Nothing like it among other candidates: flag as unselectable.
      scores.push_back(std::numeric_limits<double>::infinity());
    } else {
      scores.push_back(neg_mean / cand_mean);
    }
  }
  return scores;
}

Selection select(const std::vector<double>& scores, double cutoff) {
  Selection sel;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] <= cutoff) sel.selected.push_back(i);
  sel.fraction = scores.empty()
                     ? 0.0
                     : static_cast<double>(sel.selected.size()) / static_cast<double>(scores.size());
  return sel;
}

}  // namespace kwic
