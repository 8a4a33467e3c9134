#include "kwic/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "kwic/error.hpp"

namespace kwic {

std::size_t Corpus::privileged_count() const {
  return static_cast<std::size_t>(
      std::count_if(documents.begin(), documents.end(),
                    [](const Document& d) { return d.privileged; }));
}

const Document* Corpus::find(const std::string& id) const {
  for (const auto& d : documents)
    if (d.id == id) return &d;
  return nullptr;
}

Corpus load_corpus(const std::string& path, CorpusFormat format) {
  if (format != CorpusFormat::jsonl) throw ValidationError("unknown corpus format");
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus file: " + path);

  Corpus corpus;
  corpus.name = path;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed corpus record: ") + e.what(), line_no);
    }
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("text") ||
        !rec.contains("privileged"))
      throw ParseError("corpus record needs id, text and privileged fields", line_no);

    Document doc;
    try {
      doc.id = rec.at("id").get<std::string>();
      doc.text = rec.at("text").get<std::string>();
      doc.privileged = rec.at("privileged").get<bool>();
      if (rec.contains("footer_start") && !rec.at("footer_start").is_null())
        doc.footer_start = rec.at("footer_start").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("corpus record field has wrong type: ") + e.what(), line_no);
    }
    if (doc.footer_start && *doc.footer_start > doc.text.size())
      throw ParseError("footer_start past end of text", line_no);
    if (!seen.insert(doc.id).second)
      throw ValidationError("duplicate document id: " + doc.id);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& path, CorpusFormat format) {
  if (format != CorpusFormat::jsonl) throw ValidationError("unknown corpus format");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot open corpus file for writing: " + path);
  for (const auto& doc : corpus.documents) {
    nlohmann::json rec{{"id", doc.id}, {"text", doc.text}, {"privileged", doc.privileged}};
    if (doc.footer_start) rec["footer_start"] = *doc.footer_start;
    out << rec.dump() << '\n';
  }
}

namespace {

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool matches_at(const std::string& text, std::size_t pos, const std::string& marker) {
  if (pos + marker.size() > text.size()) return false;
  for (std::size_t i = 0; i < marker.size(); ++i)
    if (ascii_lower(text[pos + i]) != ascii_lower(marker[i])) return false;
  return true;
}

}  // namespace

std::optional<std::size_t> detect_footer(const Document& doc,
                                         const std::vector<std::string>& markers,
                                         double trailing_fraction) {
  if (markers.empty()) throw ValidationError("detect_footer needs at least one marker phrase");
  if (trailing_fraction <= 0.0 || trailing_fraction > 1.0)
    throw ValidationError("trailing fraction must lie in (0,1]");
  const std::string& text = doc.text;
  if (text.empty()) return std::nullopt;

  const auto region_start = static_cast<std::size_t>(
      static_cast<double>(text.size()) * (1.0 - trailing_fraction));
  for (std::size_t pos = region_start; pos < text.size(); ++pos) {
    for (const auto& marker : markers) {
      if (!marker.empty() && matches_at(text, pos, marker)) return pos;
    }
  }
  return std::nullopt;
}

}  // namespace kwic
