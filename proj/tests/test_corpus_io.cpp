#include "doctest.h"

#include <random>
#include <set>

#include "generators.hpp"
#include "nerforge/corpus_io.hpp"
#include "nerforge/span_codec.hpp"

using namespace nerforge;

TEST_CASE("parse_flat_conll decodes BIO spans") {
  auto docs = parse_flat_conll("John B-PER\nSmith I-PER\nruns O\n");
  REQUIRE(docs.size() == 1);
  REQUIRE(docs[0].sentences.size() == 1);
  CHECK(docs[0].sentences[0].words() == std::vector<std::string>{"John", "Smith", "runs"});
  CHECK(docs[0].sentences[0].flat_spans == SpanList{{0, 2, "PER"}});
  CHECK(parse_flat_conll("").empty());
  CHECK(parse_flat_conll("\n\n").empty());
}

TEST_CASE("parse_flat_conll handles multi-column IOB1 input and DOCSTART") {
  const char* text =
      "-DOCSTART- -X- -X- O\n\n"
      "EU NNP B-NP I-ORG\nrejects VBZ B-VP O\nGerman JJ B-NP I-MISC\n\n"
      "-DOCSTART- -X- -X- O\n\n"
      "Peter NNP B-NP I-PER\r\nBlackburn NNP I-NP I-PER\r\n";
  auto docs = parse_flat_conll(text, 0, 3);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].sentences[0].flat_spans == SpanList{{0, 1, "ORG"}, {2, 3, "MISC"}});
  CHECK(docs[1].sentences[0].flat_spans == SpanList{{0, 2, "PER"}});
  CHECK(docs[1].sentences[0].words() == std::vector<std::string>{"Peter", "Blackburn"});
  // -1 addresses the last column.
  CHECK(parse_flat_conll(text, 0, -1)[0].sentences[0].flat_spans == docs[0].sentences[0].flat_spans);
}

TEST_CASE("parse_flat_conll reports malformed lines") {
  try {
    parse_flat_conll("a O\nb c O\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_flat_conll("a X-PER\n"), ParseError);
  CHECK_THROWS_AS(parse_flat_conll("a B-\n"), ParseError);
  CHECK_THROWS_AS(parse_flat_conll("a\n", 0, 1), ParseError);
}

TEST_CASE("write_flat_conll emits tab-separated BIO") {
  Document doc;
  Sentence s = make_sentence({"John", "Smith"});
  s.flat_spans = {{0, 2, "PER"}};
  doc.sentences.push_back(s);
  CHECK(write_flat_conll(doc) == "John\tB-PER\nSmith\tI-PER\n\n");
  CHECK(write_flat_conll(doc, ColumnOrder::LabelToken) == "B-PER\tJohn\nI-PER\tSmith\n\n");
  doc.sentences[0].flat_spans.clear();
  CHECK(write_flat_conll(doc) == "John\tO\nSmith\tO\n\n");
  doc.sentences[0].flat_spans = {{0, 2, "PER"}, {1, 2, "LOC"}};
  CHECK_THROWS_AS(write_flat_conll(doc), SpanError);
}

TEST_CASE("flat write/parse round trip on random documents") {
  std::mt19937_64 rng(1234);
  std::vector<Document> docs;
  for (int d = 0; d < 50; ++d) {
    Document doc;
    doc.id = std::to_string(d);
    for (int i = 0; i < 20; ++i) {
      auto s = testing::random_sentence(rng, std::uniform_int_distribution<std::size_t>(1, 25)(rng));
      s.flat_spans = testing::random_disjoint_spans(rng, s.size(), {"PER", "ORG", "LOC", "MISC"});
      doc.sentences.push_back(std::move(s));
    }
    docs.push_back(std::move(doc));
  }
  // 1000 sentences across 50 documents.
  const auto text = write_flat_conll(docs);
  const auto back = parse_flat_conll(text);
  REQUIRE(back.size() == docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    CHECK(back[d].id == docs[d].id);
    CHECK(back[d].sentences == docs[d].sentences);
  }
  // Single document, label-first columns.
  const auto one = parse_flat_conll(write_flat_conll(docs[0], ColumnOrder::LabelToken), 1, 0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].sentences == docs[0].sentences);
}

TEST_CASE("parse_nested reconstructs nested spans") {
  auto docs = parse_nested("Johns\tB-ORG|B-PER\nHopkins\tI-ORG|I-PER\nUniversity\tI-ORG\n");
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].sentences[0].nested_spans == SpanList{{0, 3, "ORG"}, {0, 2, "PER"}});
  auto plain = parse_nested("a\tO\nb\tO\n");
  CHECK(plain[0].sentences[0].nested_spans.empty());
}

TEST_CASE("parse_nested rejects labels that cannot come from a non-crossing nesting") {
  // PER continues past the end of its parent ORG.
  CHECK_THROWS_AS(parse_nested("a\tB-ORG|B-PER\nb\tI-ORG|I-PER\nc\tI-PER\n"), ParseError);
  // Inner label before outer.
  CHECK_THROWS_AS(parse_nested("a\tB-PER|B-ORG\nb\tI-ORG\n"), ParseError);
  CHECK_THROWS_AS(parse_nested("a\tB-PER|B-PER\n"), ParseError);
  CHECK_THROWS_AS(parse_nested("a\tX-PER\n"), ParseError);
  CHECK_THROWS_AS(parse_nested("a\tO\textra\n"), ParseError);
  try {
    parse_nested("x\tO\n\na\tB-ORG|B-PER\nb\tI-ORG|I-PER\nc\tI-PER\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("sentence 2") != std::string::npos);
  }
}

TEST_CASE("nested write/parse round trip on random non-crossing sets") {
  std::mt19937_64 rng(99);
  Document doc;
  for (int i = 0; i < 500; ++i) {
    auto s = testing::random_sentence(rng, std::uniform_int_distribution<std::size_t>(1, 20)(rng));
    s.nested_spans = testing::random_nested_spans(rng, s.size(), 4, {"PER", "ORG", "LOC"});
    doc.sentences.push_back(std::move(s));
  }
  auto back = parse_nested(write_nested(doc));
  REQUIRE(back.size() == 1);
  CHECK(back[0].sentences == doc.sentences);
}

TEST_CASE("flatten_to_outermost") {
  Sentence s = make_sentence({"a", "b", "c"});
  s.nested_spans = {{0, 3, "ORG"}, {0, 2, "PER"}};
  auto f = flatten_to_outermost(s);
  CHECK(f.flat_spans == SpanList{{0, 3, "ORG"}});
  CHECK(f.nested_spans == s.nested_spans);
  CHECK(flatten_to_outermost(f) == f);
  s.nested_spans.clear();
  CHECK(flatten_to_outermost(s).flat_spans.empty());

  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    auto r = testing::random_sentence(rng, 18);
    r.nested_spans = testing::random_nested_spans(rng, r.size(), 3, {"A", "B"});
    auto out = flatten_to_outermost(r);
    CHECK_NOTHROW(validate_sentence(out));
    CHECK(flatten_to_outermost(out) == out);
  }
}

TEST_CASE("map_labels relabels, drops and preserves boundaries") {
  Document doc;
  Sentence s = make_sentence({"Taras", "Shevchenko", "Kyiv"});
  s.flat_spans = {{0, 2, "PERS"}, {2, 3, "LOC"}};
  s.nested_spans = {{0, 1, "PERS"}};
  doc.sentences.push_back(s);
  auto mapped = map_labels(doc, {{"PERS", "PER"}});
  CHECK(mapped.sentences[0].flat_spans == SpanList{{0, 2, "PER"}, {2, 3, "LOC"}});
  CHECK(mapped.sentences[0].nested_spans == SpanList{{0, 1, "PER"}});
  CHECK(map_labels(doc, {}).sentences == doc.sentences);
  auto dropped = map_labels(doc, {{"LOC", std::nullopt}});
  CHECK(dropped.sentences[0].flat_spans == SpanList{{0, 2, "PERS"}});
}

TEST_CASE("map_labels collapses a fine-grained inventory onto four types") {
  // 46 synthetic fine-grained types, mapped by their first letter.
  std::vector<std::string> fine;
  LabelMapping mapping;
  const char* coarse[] = {"PER", "ORG", "LOC", "MISC"};
  for (int i = 0; i < 46; ++i) {
    fine.push_back("t" + std::to_string(i));
    mapping[fine.back()] = std::string(coarse[i % 4]);
  }
  std::mt19937_64 rng(8);
  Document doc;
  for (int i = 0; i < 200; ++i) {
    auto s = testing::random_sentence(rng, 20);
    s.flat_spans = testing::random_disjoint_spans(rng, 20, fine);
    doc.sentences.push_back(std::move(s));
  }
  std::set<std::string> before, after;
  auto mapped = map_labels(doc, mapping);
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    const auto& a = doc.sentences[i].flat_spans;
    const auto& b = mapped.sentences[i].flat_spans;
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].start == b[k].start);
      CHECK(a[k].end == b[k].end);
      before.insert(a[k].etype);
      after.insert(b[k].etype);
    }
  }
  CHECK(before.size() > 4);
  CHECK(after.size() <= 4);
}
