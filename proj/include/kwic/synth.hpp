#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kwic/corpus.hpp"
#include "kwic/keyword.hpp"

namespace kwic {

// Recipe for a synthetic corpus with planted privileged contexts. The
// planted and background token pools must be disjoint and must not contain
// tokens matching any of the keywords, so that every keyword occurrence is
// placed deliberately.
struct SynthSpec {
  std::size_t n_docs = 0;
  double privileged_fraction = 0.1;
  std::vector<KeywordPattern> keywords;
  double footer_probability = 0.0;
  std::vector<std::string> planted_context_vocab;
  std::vector<std::string> background_vocab;
  std::uint64_t seed = 0;

  void validate() const;
};

// Deterministic in the recipe: the same SynthSpec (seed included) yields an
// identical corpus. Privileged documents carry at least one keyword
// occurrence whose context is drawn from the planted pool; non-privileged
// documents may carry keyword occurrences in background context; documents
// of both classes may end in a keyword-bearing footer, recorded in
// footer_start.
Corpus generate_synthetic(const SynthSpec& spec);

}  // namespace kwic
