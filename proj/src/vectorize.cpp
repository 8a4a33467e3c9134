#include "kwic/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "kwic/error.hpp"

namespace kwic {

namespace {

// FNV-1a over tokens separated by '\n'; stable across platforms, used to
// detect a model/vocabulary mismatch at load time.
std::uint64_t fnv1a_tokens(const std::vector<std::string>& tokens) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (const auto& t : tokens) {
    for (char c : t) mix(static_cast<unsigned char>(c));
    mix('\n');
  }
  return h;
}

// Top max_size tokens by descending count, ties broken lexicographically.
// std::map keeps tokens sorted, so equal-count runs come out in order.
std::vector<std::string> rank_tokens(const std::vector<Occurrence>& windows,
                                     std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const auto& occ : windows)
    for (const auto& tok : occ.window) ++counts[tok];

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_size) ranked.resize(max_size);

  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [tok, cnt] : ranked) tokens.push_back(std::move(tok));
  return tokens;
}

std::vector<std::string> load_token_lines(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ValidationError(std::string("cannot open ") + what + " file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError(std::string(what) + " has an empty line", line_no);
    tokens.push_back(line);
  }
  return tokens;
}

void save_token_lines(const std::vector<std::string>& tokens, const std::string& path,
                      const char* what) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw ValidationError(std::string("cannot open ") + what + " file for writing: " + path);
  for (const auto& t : tokens) out << t << '\n';
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> ranked_tokens)
    : tokens_(std::move(ranked_tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw ValidationError("vocabulary token is empty");
    auto [it, inserted] =
        index_.emplace(tokens_[i], static_cast<std::int32_t>(i) + 2);
    if (!inserted) throw ValidationError("duplicate vocabulary token: " + tokens_[i]);
  }
}

std::int32_t Vocabulary::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kOovIndex : it->second;
}

const std::string& Vocabulary::token_at(std::int32_t index) const {
  if (index < 2 || index >= size() + 2)
    throw ValidationError("vocabulary index out of range: " + std::to_string(index));
  return tokens_[static_cast<std::size_t>(index - 2)];
}

std::uint64_t Vocabulary::fingerprint() const { return fnv1a_tokens(tokens_); }

void Vocabulary::save(const std::string& path) const {
  save_token_lines(tokens_, path, "vocabulary");
}

Vocabulary Vocabulary::load(const std::string& path) {
  return Vocabulary(load_token_lines(path, "vocabulary"));
}

Vocabulary fit_vocabulary(const std::vector<Occurrence>& windows, std::size_t max_size) {
  if (max_size == 0) throw ValidationError("vocabulary size must be positive");
  return Vocabulary(rank_tokens(windows, max_size));
}

EncodedWindow encode_window(const Occurrence& occurrence, const Vocabulary& vocab,
                            std::size_t sequence_length) {
  if (sequence_length == 0) throw ValidationError("sequence length must be positive");
  if (occurrence.window.size() > sequence_length)
    throw ValidationError("occurrence window longer than sequence length");
  EncodedWindow enc;
  enc.label = occurrence.label;
  enc.indices.assign(sequence_length, Vocabulary::kPadIndex);
  // Left padding: the window content ends flush with the sequence end.
  const std::size_t offset = sequence_length - occurrence.window.size();
  for (std::size_t i = 0; i < occurrence.window.size(); ++i)
    enc.indices[offset + i] = vocab.index_of(occurrence.window[i]);
  return enc;
}

std::vector<EncodedWindow> encode_windows(const std::vector<Occurrence>& occurrences,
                                          const Vocabulary& vocab,
                                          std::size_t sequence_length) {
  std::vector<EncodedWindow> out;
  out.reserve(occurrences.size());
  for (const auto& occ : occurrences) out.push_back(encode_window(occ, vocab, sequence_length));
  return out;
}

BowSpace::BowSpace(std::vector<std::string> ranked_tokens) : tokens_(std::move(ranked_tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw ValidationError("feature token is empty");
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<std::int32_t>(i));
    if (!inserted) throw ValidationError("duplicate feature token: " + tokens_[i]);
  }
}

std::int32_t BowSpace::feature_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

std::uint64_t BowSpace::fingerprint() const { return fnv1a_tokens(tokens_); }

void BowSpace::save(const std::string& path) const {
  save_token_lines(tokens_, path, "feature space");
}

BowSpace BowSpace::load(const std::string& path) {
  return BowSpace(load_token_lines(path, "feature space"));
}

BowSpace fit_bow_space(const std::vector<Occurrence>& train_windows, std::size_t max_features) {
  if (max_features == 0) throw ValidationError("feature count must be positive");
  return BowSpace(rank_tokens(train_windows, max_features));
}

BowVector bow_vectorize(const Occurrence& window, const BowSpace& space) {
  std::map<std::int32_t, double> counts;
  for (const auto& tok : window.window) {
    const auto f = space.feature_of(tok);
    if (f >= 0) counts[f] += 1.0;
  }
  BowVector v;
  v.dimension = space.dimension();
  v.entries.assign(counts.begin(), counts.end());
  double sq = 0.0;
  for (const auto& [f, c] : v.entries) sq += c * c;
  v.norm = std::sqrt(sq);
  return v;
}

std::vector<BowVector> bow_vectorize(const std::vector<Occurrence>& windows,
                                     const BowSpace& space) {
  std::vector<BowVector> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back(bow_vectorize(w, space));
  return out;
}

double cosine(const BowVector& a, const BowVector& b) {
  if (a.dimension != b.dimension)
    throw ValidationError("cosine between vectors of different dimension");
  if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
  double dot = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  const double c = dot / (a.norm * b.norm);
  return std::min(1.0, std::max(0.0, c));
}

}  // namespace kwic
