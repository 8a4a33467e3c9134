#include "kwic/synth.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "kwic/error.hpp"
#include "kwic/rng.hpp"

namespace kwic {

void SynthSpec::validate() const {
  if (n_docs == 0) throw ValidationError("synthetic corpus needs at least one document");
  if (privileged_fraction <= 0.0 || privileged_fraction >= 1.0)
    throw ValidationError("privileged fraction must lie strictly between 0 and 1");
  if (keywords.empty()) throw ValidationError("synthetic corpus needs at least one keyword");
  if (footer_probability < 0.0 || footer_probability > 1.0)
    throw ValidationError("footer probability must lie in [0,1]");
  if (planted_context_vocab.size() < 8)
    throw ValidationError("planted context vocabulary needs at least 8 tokens");
  if (background_vocab.size() < 8)
    throw ValidationError("background vocabulary needs at least 8 tokens");

  std::unordered_set<std::string> planted(planted_context_vocab.begin(),
                                          planted_context_vocab.end());
  for (const auto& t : background_vocab)
    if (planted.count(t))
      throw ValidationError("planted and background vocabularies overlap on: " + t);

  // Every keyword occurrence must be placed deliberately, so neither pool may
  // contain a token that matches a keyword.
  for (const auto& kw : keywords) {
    for (const auto& t : planted_context_vocab)
      if (match_keyword(kw, std::string_view(t)))
        throw ValidationError("planted vocabulary token matches keyword: " + t);
    for (const auto& t : background_vocab)
      if (match_keyword(kw, std::string_view(t)))
        throw ValidationError("background vocabulary token matches keyword: " + t);
  }
}

namespace {

constexpr std::size_t kContextSide = 20;  // planted tokens on each side of a keyword

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[rng.below(pool.size())];
}

std::string keyword_surface(const KeywordPattern& kw, Rng& rng) {
  if (!kw.prefix_wildcard) return kw.stem;
  // A few plausible suffixes so wildcard patterns see varied surfaces.
  static const std::array<const char*, 4> suffixes = {"", "s", "ed", "ing"};
  return kw.stem + suffixes[rng.below(suffixes.size())];
}

void append_tokens(std::string& text, const std::vector<std::string>& pool, std::size_t count,
                   Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    if (!text.empty()) text += ' ';
    text += pick(pool, rng);
  }
}

void append_keyword_with_context(std::string& text, const KeywordPattern& kw,
                                 const std::vector<std::string>& context_pool, Rng& rng) {
  append_tokens(text, context_pool, kContextSide, rng);
  text += ' ';
  text += keyword_surface(kw, rng);
  append_tokens(text, context_pool, kContextSide, rng);
}

}  // namespace

Corpus generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  Corpus corpus;
  corpus.name = "synthetic";
  corpus.documents.reserve(spec.n_docs);

  const auto n_privileged = std::max<std::size_t>(
      1, static_cast<std::size_t>(static_cast<double>(spec.n_docs) * spec.privileged_fraction));
  if (n_privileged >= spec.n_docs)
    throw ValidationError("privileged fraction leaves no non-privileged documents");

  for (std::size_t d = 0; d < spec.n_docs; ++d) {
    // One independent stream per document, so corpus size changes do not
    // reshuffle earlier documents.
    Rng rng(derive_seed(spec.seed, 0x5e9d0000u + static_cast<std::uint64_t>(d)));
    Document doc;
    doc.id = "doc-" + std::to_string(d);
    doc.privileged = d < n_privileged;

    std::string text;
    append_tokens(text, spec.background_vocab, 30 + rng.below(40), rng);

    if (doc.privileged) {
      // Every privileged document carries at least one keyword in planted
      // context; some carry a second.
      const auto& kw = spec.keywords[rng.below(spec.keywords.size())];
      text += ' ';
      append_keyword_with_context(text, kw, spec.planted_context_vocab, rng);
      if (rng.bernoulli(0.5)) {
        const auto& kw2 = spec.keywords[rng.below(spec.keywords.size())];
        text += ' ';
        append_keyword_with_context(text, kw2, spec.planted_context_vocab, rng);
      }
      // Background keyword mentions appear in privileged documents too; they
      // are the noise the cleaning step is meant to catch.
      if (rng.bernoulli(0.3)) {
        const auto& kw3 = spec.keywords[rng.below(spec.keywords.size())];
        text += ' ';
        append_keyword_with_context(text, kw3, spec.background_vocab, rng);
      }
    } else if (rng.bernoulli(0.35)) {
      const auto& kw = spec.keywords[rng.below(spec.keywords.size())];
      text += ' ';
      append_keyword_with_context(text, kw, spec.background_vocab, rng);
    }

    text += ' ';
    append_tokens(text, spec.background_vocab, 20 + rng.below(30), rng);

    if (rng.bernoulli(spec.footer_probability)) {
      const auto& kw = spec.keywords[rng.below(spec.keywords.size())];
      text += ' ';
      doc.footer_start = text.size();
      text += "confidentiality notice this message may contain ";
      text += keyword_surface(kw, rng);
      text += " client material do not distribute";
    }

    doc.text = std::move(text);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace kwic
