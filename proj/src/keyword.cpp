#include "kwic/keyword.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "json.hpp"
#include "kwic/corpus.hpp"
#include "kwic/error.hpp"

namespace kwic {

namespace {

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string lower_copy(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

}  // namespace

KeywordPattern KeywordPattern::parse(const std::string& written) {
  if (written.empty()) throw ValidationError("keyword pattern is empty");
  KeywordPattern p;
  if (written.back() == '*') {
    p.prefix_wildcard = true;
    p.stem = written.substr(0, written.size() - 1);
  } else {
    p.stem = written;
  }
  if (p.stem.empty()) throw ValidationError("keyword pattern has empty stem: " + written);
  // A wildcard anywhere but the tail is not a supported pattern.
  if (p.stem.find('*') != std::string::npos)
    throw ValidationError("keyword wildcard is only supported at the end: " + written);
  for (char& c : p.stem) {
    if (!is_word_char(c))
      throw ValidationError("keyword stem must be alphanumeric: " + written);
    c = ascii_lower(c);
  }
  return p;
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && is_word_char(text[i])) ++i;
    Token t;
    t.surface = lower_copy(text.substr(start, i - start));
    t.char_start = start;
    t.char_end = i;
    tokens.push_back(std::move(t));
  }
  return tokens;
}

bool match_keyword(const KeywordPattern& pattern, std::string_view token_surface) {
  if (pattern.prefix_wildcard) {
    if (token_surface.size() < pattern.stem.size()) return false;
    return token_surface.substr(0, pattern.stem.size()) == pattern.stem;
  }
  return token_surface == pattern.stem;
}

bool match_keyword(const KeywordPattern& pattern, const Token& token) {
  return match_keyword(pattern, std::string_view(token.surface));
}

std::vector<Occurrence> extract_occurrences(const Document& doc,
                                            const KeywordPattern& pattern,
                                            int window_radius) {
  if (window_radius <= 0) throw ValidationError("window radius must be positive");
  const auto radius = static_cast<std::size_t>(window_radius);
  const auto tokens = tokenize(doc.text);
  std::vector<Occurrence> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!match_keyword(pattern, tokens[i])) continue;
    Occurrence occ;
    occ.doc_id = doc.id;
    occ.keyword = pattern;
    occ.center_index = i;
    // Window is truncated at document edges; no padding is stored here.
    const std::size_t begin = i >= radius ? i - radius : 0;
    const std::size_t end = std::min(tokens.size(), i + radius + 1);
    occ.window_begin = begin;
    occ.window.reserve(end - begin);
    for (std::size_t j = begin; j < end; ++j) occ.window.push_back(tokens[j].surface);
    occ.in_footer = doc.footer_start && tokens[i].char_start >= *doc.footer_start;
    occ.label = doc.privileged ? Label::candidate_positive : Label::negative;
    out.push_back(std::move(occ));
  }
  return out;
}

std::vector<Occurrence> derive_labels(const Corpus& corpus,
                                      const std::vector<Occurrence>& occurrences,
                                      bool drop_footer_in_privileged) {
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& d : corpus.documents) by_id.emplace(d.id, &d);

  std::vector<Occurrence> out;
  out.reserve(occurrences.size());
  for (const auto& occ : occurrences) {
    auto it = by_id.find(occ.doc_id);
    if (it == by_id.end())
      throw ValidationError("occurrence references unknown document: " + occ.doc_id);
    const Document& doc = *it->second;
    Occurrence labeled = occ;
    if (doc.privileged) {
      // Footer mentions inside privileged documents are boilerplate, not
      // evidence of privileged content, so they are dropped rather than kept
      // as misleading positives.
      if (drop_footer_in_privileged && occ.in_footer) continue;
      labeled.label = Label::candidate_positive;
    } else {
      labeled.label = Label::negative;
    }
    out.push_back(std::move(labeled));
  }
  return out;
}

void write_occurrences(const std::vector<Occurrence>& occurrences, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open occurrence file for writing: " + path);
  for (const auto& occ : occurrences) {
    nlohmann::json rec{
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
}

std::vector<Occurrence> load_occurrences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open occurrence file: " + path);
  std::vector<Occurrence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed occurrence record: ") + e.what(), line_no);
    }
    try {
      Occurrence occ;
      occ.doc_id = rec.at("doc_id").get<std::string>();
      occ.keyword = KeywordPattern::parse(rec.at("keyword").get<std::string>());
      occ.center_index = rec.at("center_index").get<std::size_t>();
      occ.window_begin = rec.at("window_begin").get<std::size_t>();
      occ.window = rec.at("window").get<std::vector<std::string>>();
      const int label = rec.at("label").get<int>();
      if (label != 0 && label != 1)
        throw ValidationError("occurrence label must be 0 or 1");
      occ.label = label == 1 ? Label::candidate_positive : Label::negative;
      occ.in_footer = rec.at("in_footer").get<bool>();
      if (occ.window.empty()) throw ValidationError("occurrence window is empty");
      if (occ.center_index < occ.window_begin ||
          occ.center_index >= occ.window_begin + occ.window.size())
        throw ValidationError("occurrence center lies outside its window");
      out.push_back(std::move(occ));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("occurrence record field has wrong type: ") + e.what(),
                       line_no);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace kwic
