#include <cctype>
#include <string>
#include <vector>

#include "doctest.h"
#include "kwic/corpus.hpp"
#include "kwic/error.hpp"
#include "kwic/synth.hpp"
#include "test_util.hpp"

using namespace kwic;
using testutil::TempDir;
using testutil::read_file;
using testutil::write_file;

TEST_CASE("load_corpus reads records in order") {
  TempDir dir;
  const auto p = dir.file("c.jsonl");
  write_file(p,
             R"({"id":"d1","text":"hello legal world","privileged":true})"
             "\n"
             R"({"id":"d2","text":"plain text","privileged":false})"
             "\n");
  const Corpus c = load_corpus(p);
  CHECK(c.size() == 2);
  CHECK(c.privileged_count() == 1);
  CHECK(c.documents[0].id == "d1");
  CHECK(c.documents[1].id == "d2");
  CHECK(c.documents[0].privileged);
  CHECK_FALSE(c.documents[1].privileged);
  CHECK(c.find("d2") != nullptr);
  CHECK(c.find("missing") == nullptr);
}

TEST_CASE("load_corpus on an empty file yields an empty corpus") {
  TempDir dir;
  const auto p = dir.file("empty.jsonl");
  write_file(p, "");
  CHECK(load_corpus(p).size() == 0);
}

TEST_CASE("load_corpus rejects duplicate ids") {
  TempDir dir;
  const auto p = dir.file("dup.jsonl");
  write_file(p,
             R"({"id":"d1","text":"a","privileged":false})"
             "\n"
             R"({"id":"d1","text":"b","privileged":true})"
             "\n");
  CHECK_THROWS_AS(load_corpus(p), ValidationError);
}

TEST_CASE("load_corpus names the line of a malformed record") {
  TempDir dir;
  const auto p = dir.file("bad.jsonl");
  write_file(p,
             R"({"id":"d1","text":"a","privileged":false})"
             "\n{not json\n");
  try {
    load_corpus(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("load_corpus requires the mandatory fields") {
  TempDir dir;
  const auto p = dir.file("missing.jsonl");
  write_file(p, R"({"id":"d1","text":"a"})"
                "\n");
  CHECK_THROWS_AS(load_corpus(p), ParseError);
}

TEST_CASE("corpus round-trips through write and load") {
  TempDir dir;
  Corpus c;
  c.documents.push_back({"a", "some text with legal words", true, std::nullopt});
  c.documents.push_back({"b", "other text", false, 6});
  const auto p = dir.file("rt.jsonl");
  write_corpus(c, p);
  const Corpus back = load_corpus(p);
  REQUIRE(back.size() == 2);
  CHECK(back.documents[0].id == "a");
  CHECK(back.documents[0].text == c.documents[0].text);
  CHECK(back.documents[0].privileged);
  CHECK_FALSE(back.documents[0].footer_start.has_value());
  CHECK(back.documents[1].footer_start == 6);

  // Byte-identical on rewrite.
  const auto p2 = dir.file("rt2.jsonl");
  write_corpus(back, p2);
  CHECK(read_file(p) == read_file(p2));
}

TEST_CASE("detect_footer finds a trailing marker") {
  Document doc;
  // The footer spans the last ~40% of the text, so widen the search region
  // past the 25% default.
  doc.text = "The quarterly results look strong and we should discuss them soon. "
             "This email may contain privileged information.";
  const auto off = detect_footer(doc, {"this email may contain"}, 0.5);
  REQUIRE(off.has_value());
  CHECK(doc.text.substr(*off, 22) == "This email may contain");
}

TEST_CASE("detect_footer ignores markers outside the trailing region") {
  Document doc;
  // Marker sits in the first tenth of a long text.
  std::string text = "confidentiality notice at the very start. ";
  text.append(600, 'x');
  doc.text = text;
  CHECK_FALSE(detect_footer(doc, {"confidentiality notice"}).has_value());
}

TEST_CASE("detect_footer returns the earlier of two trailing markers") {
  std::string body(300, 'a');
  const std::string text = body + " do not distribute this. confidentiality notice follows.";
  Document doc;
  doc.text = text;
  const std::vector<std::string> markers = {"confidentiality notice", "do not distribute"};
  const auto off = detect_footer(doc, markers);

  // Brute-force oracle: earliest case-insensitive position of any marker in
  // the trailing quarter.
  std::size_t best = std::string::npos;
  std::string lower = text;
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  const std::size_t region = static_cast<std::size_t>(text.size() * 0.75);
  for (const auto& m : markers) {
    const auto pos = lower.find(m, region);
    if (pos != std::string::npos && pos < best) best = pos;
  }
  REQUIRE(off.has_value());
  CHECK(*off == best);
  CHECK(*off >= region);
}

TEST_CASE("detect_footer is case-insensitive") {
  Document doc;
  doc.text = "short body. THIS EMAIL MAY CONTAIN privileged material";
  CHECK(detect_footer(doc, {"this email may contain"}, 0.8).has_value());
}

TEST_CASE("detect_footer requires markers") {
  Document doc;
  doc.text = "anything";
  CHECK_THROWS_AS(detect_footer(doc, {}), ValidationError);
}

namespace {

SynthSpec small_spec() {
  SynthSpec spec;
  spec.n_docs = 100;
  spec.privileged_fraction = 0.1;
  spec.keywords = {KeywordPattern::parse("legal"), KeywordPattern::parse("privi*")};
  spec.footer_probability = 0.3;
  spec.planted_context_vocab = {"advice", "counsel", "litigation", "settlement",
                                "opinion", "strategy", "motion", "discovery"};
  spec.background_vocab = {"meeting", "budget", "schedule", "invoice",
                           "shipment", "quarterly", "report", "office"};
  spec.seed = 7;
  return spec;
}

}  // namespace

TEST_CASE("generate_synthetic honors the privileged fraction") {
  const Corpus c = generate_synthetic(small_spec());
  CHECK(c.size() == 100);
  CHECK(c.privileged_count() == 10);
}

TEST_CASE("generate_synthetic is a pure function of its spec") {
  TempDir dir;
  const Corpus a = generate_synthetic(small_spec());
  const Corpus b = generate_synthetic(small_spec());
  const auto pa = dir.file("a.jsonl");
  const auto pb = dir.file("b.jsonl");
  write_corpus(a, pa);
  write_corpus(b, pb);
  CHECK(read_file(pa) == read_file(pb));
}

TEST_CASE("generate_synthetic with footer_probability 1 sets footer_start everywhere") {
  SynthSpec spec = small_spec();
  spec.footer_probability = 1.0;
  const Corpus c = generate_synthetic(spec);
  for (const auto& doc : c.documents) {
    REQUIRE(doc.footer_start.has_value());
    CHECK(*doc.footer_start <= doc.text.size());
  }
}

TEST_CASE("generate_synthetic rejects invalid fractions") {
  SynthSpec spec = small_spec();
  spec.privileged_fraction = 1.5;
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
  spec = small_spec();
  spec.privileged_fraction = 0.0;
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
}

TEST_CASE("generate_synthetic rejects vocabulary overlap and keyword collisions") {
  SynthSpec spec = small_spec();
  spec.background_vocab[0] = spec.planted_context_vocab[0];
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);

  spec = small_spec();
  spec.background_vocab[0] = "legal";
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);

  spec = small_spec();
  spec.planted_context_vocab[0] = "privilege";  // matches privi*
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
}
