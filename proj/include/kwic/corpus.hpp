#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace kwic {

// One reviewed document: full text plus the attorney's privilege call.
// footer_start, when set, is the character offset where the email footer
// region begins; occurrences at or past it count as footer hits.
struct Document {
  std::string id;
  std::string text;
  bool privileged = false;
  std::optional<std::size_t> footer_start;
};

struct Corpus {
  std::string name;
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
  std::size_t privileged_count() const;
  const Document* find(const std::string& id) const;
};

enum class CorpusFormat { jsonl };

// Reads a line-delimited corpus file. Record order is preserved; a repeated
// document id or a malformed record is an error.
Corpus load_corpus(const std::string& path, CorpusFormat format = CorpusFormat::jsonl);

void write_corpus(const Corpus& corpus, const std::string& path,
                  CorpusFormat format = CorpusFormat::jsonl);

// Earliest case-insensitive match of any marker phrase within the trailing
// portion of the text (default: the last 25% of characters). Absence of a
// footer is a valid result, not an error.
std::optional<std::size_t> detect_footer(const Document& doc,
                                         const std::vector<std::string>& markers,
                                         double trailing_fraction = 0.25);

}  // namespace kwic
