#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kwic/vectorize.hpp"

namespace kwic {

enum class Approach : std::uint8_t { one = 1, two = 2 };

struct SelectionConfig {
  int k = 3;
  double cutoff = 0.7;
  Approach approach = Approach::one;
};

// Approach one: each candidate's score is the mean cosine similarity of its
// k most similar negatives. Smaller means less like any known negative,
// hence more likely a true positive. Neighbor ties resolve to the
// lower-index negative.
std::vector<double> score_candidates_v1(const std::vector<BowVector>& candidates,
                                        const std::vector<BowVector>& negatives, int k);

// Approach two: ratio of the mean similarity of the k nearest negatives to
// the mean similarity of the k nearest other candidates (the candidate
// itself is excluded). A zero denominator yields +infinity, which no finite
// cutoff selects.
std::vector<double> score_candidates_v2(const std::vector<BowVector>& candidates,
                                        const std::vector<BowVector>& negatives, int k);

struct Selection {
  std::vector<std::size_t> selected;  // indices into the score list, ascending
  double fraction = 0.0;
};

// Keeps candidates with score <= cutoff (inclusive).
Selection select(const std::vector<double>& scores, double cutoff);

}  // namespace kwic
