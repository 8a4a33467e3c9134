#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kwic/keyword.hpp"

namespace kwic {

// Token-to-index map for the occurrence classifier. Index 0 is padding,
// index 1 is out-of-vocabulary; learned tokens occupy 2..size()+1, ranked
// by descending training-set frequency with lexicographic tie-break.
class Vocabulary {
 public:
  static constexpr std::int32_t kPadIndex = 0;
  static constexpr std::int32_t kOovIndex = 1;

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> ranked_tokens);

  std::int32_t size() const { return static_cast<std::int32_t>(tokens_.size()); }
  std::int32_t index_of(const std::string& token) const;  // kOovIndex when unknown
  const std::string& token_at(std::int32_t index) const;  // index >= 2
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::uint64_t fingerprint() const;

  void save(const std::string& path) const;  // one token per line, index = position + 2
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

Vocabulary fit_vocabulary(const std::vector<Occurrence>& windows, std::size_t max_size);

// Fixed-length index sequence for the classifier. Windows shorter than the
// sequence length are left-padded with the padding index.
struct EncodedWindow {
  std::vector<std::int32_t> indices;
  Label label = Label::negative;
};

EncodedWindow encode_window(const Occurrence& occurrence, const Vocabulary& vocab,
                            std::size_t sequence_length);
std::vector<EncodedWindow> encode_windows(const std::vector<Occurrence>& occurrences,
                                          const Vocabulary& vocab,
                                          std::size_t sequence_length);

// Sparse term-count vector over a capped feature space. Entries are sorted
// by feature index and every stored count is >= 1.
struct BowVector {
  std::vector<std::pair<std::int32_t, double>> entries;
  std::int32_t dimension = 0;
  double norm = 0.0;
};

// Feature space for bag-of-words vectors: the top max_features tokens of
// the fitting windows by frequency, ties broken lexicographically. Fit on
// the training split only.
class BowSpace {
 public:
  BowSpace() = default;
  explicit BowSpace(std::vector<std::string> ranked_tokens);

  std::int32_t dimension() const { return static_cast<std::int32_t>(tokens_.size()); }
  std::int32_t feature_of(const std::string& token) const;  // -1 when absent
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::uint64_t fingerprint() const;

  void save(const std::string& path) const;
  static BowSpace load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

BowSpace fit_bow_space(const std::vector<Occurrence>& train_windows, std::size_t max_features);

BowVector bow_vectorize(const Occurrence& window, const BowSpace& space);
std::vector<BowVector> bow_vectorize(const std::vector<Occurrence>& windows,
                                     const BowSpace& space);

// dot(a,b) / (|a|*|b|), clamped to [0,1]; 0 when either vector is all-zero.
double cosine(const BowVector& a, const BowVector& b);

}  // namespace kwic
