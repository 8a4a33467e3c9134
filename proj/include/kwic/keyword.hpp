#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kwic/corpus.hpp"

namespace kwic {

// A search term, written either as an exact token ("legal") or with a
// trailing prefix wildcard ("privi*"). The stem is lowercase and contains
// no whitespace or '*'.
struct KeywordPattern {
  std::string stem;
  bool prefix_wildcard = false;

  static KeywordPattern parse(const std::string& written);
  std::string written() const { return prefix_wildcard ? stem + "*" : stem; }
  std::string slug() const { return prefix_wildcard ? stem + "_any" : stem; }

  bool operator==(const KeywordPattern&) const = default;
};

struct Token {
  std::string surface;  // lowercase
  std::size_t char_start = 0;
  std::size_t char_end = 0;  // half-open [char_start, char_end)
};

enum class Label : std::uint8_t { negative = 0, candidate_positive = 1 };

// One keyword hit with its context window. The window holds the tokens at
// contiguous indices [window_begin, window_begin + window.size()) of the
// source document, truncated at document edges, never padded.
struct Occurrence {
  std::string doc_id;
  KeywordPattern keyword;
  std::size_t center_index = 0;
  std::size_t window_begin = 0;
  std::vector<std::string> window;
  Label label = Label::negative;
  bool in_footer = false;
};

// Splits on maximal runs of non-alphanumeric characters and lowercases.
// Empty tokens are never emitted.
std::vector<Token> tokenize(const std::string& text);

bool match_keyword(const KeywordPattern& pattern, std::string_view token_surface);
bool match_keyword(const KeywordPattern& pattern, const Token& token);

// One occurrence per matching token, in document order, each carrying the
// window of up to window_radius tokens on either side. The label is taken
// from the document's privilege flag; in_footer is set when the center
// token starts at or past doc.footer_start.
std::vector<Occurrence> extract_occurrences(const Document& doc,
                                            const KeywordPattern& pattern,
                                            int window_radius);

// Re-derives labels from the parent documents and, when
// drop_footer_in_privileged is set, removes footer occurrences from
// privileged documents. Footer occurrences in non-privileged documents are
// retained as negatives.
std::vector<Occurrence> derive_labels(const Corpus& corpus,
                                      const std::vector<Occurrence>& occurrences,
                                      bool drop_footer_in_privileged = true);

void write_occurrences(const std::vector<Occurrence>& occurrences, const std::string& path);
std::vector<Occurrence> load_occurrences(const std::string& path);

}  // namespace kwic
