#include "doctest.h"

#include <random>

#include "generators.hpp"
#include "nerforge/span_codec.hpp"

using namespace nerforge;

namespace {
std::vector<Label> labels(std::initializer_list<const char*> items) {
  std::vector<Label> out;
  for (const char* s : items) out.push_back(*Label::parse(s));
  return out;
}
}  // namespace

TEST_CASE("spans_to_bio encodes begin and inside labels") {
  CHECK(spans_to_bio(5, {{0, 2, "PER"}, {3, 4, "LOC"}}) ==
        std::vector<std::string>{"B-PER", "I-PER", "O", "B-LOC", "O"});
  CHECK(spans_to_bio(3, {}) == std::vector<std::string>{"O", "O", "O"});
}

TEST_CASE("spans_to_bio rejects overlapping spans and names them") {
  try {
    spans_to_bio(4, {{0, 2, "PER"}, {1, 3, "ORG"}});
    FAIL("expected SpanError");
  } catch (const SpanError& e) {
    CHECK(std::string(e.what()).find("(0,2,PER)") != std::string::npos);
    CHECK(std::string(e.what()).find("(1,3,ORG)") != std::string::npos);
  }
  CHECK_THROWS_AS(spans_to_bio(2, {{1, 3, "PER"}}), SpanError);
}

TEST_CASE("bio_to_spans applies the I-after-O repair rule") {
  CHECK(bio_to_spans({"B-PER", "I-PER", "O"}) == SpanList{{0, 2, "PER"}});
  CHECK(bio_to_spans({"O", "I-PER", "I-PER"}) == SpanList{{1, 3, "PER"}});
  CHECK(bio_to_spans({"B-PER", "I-LOC"}) == SpanList{{0, 1, "PER"}, {1, 2, "LOC"}});
  CHECK(bio_to_spans({"B-PER", "B-PER"}) == SpanList{{0, 1, "PER"}, {1, 2, "PER"}});
  CHECK(bio_to_spans({}).empty());
  // IOB1: I- opens, B- only separates adjacent same-type entities.
  CHECK(bio_to_spans({"I-ORG", "I-ORG", "B-ORG", "O"}) == SpanList{{0, 2, "ORG"}, {2, 3, "ORG"}});
}

TEST_CASE("BIO round trip on random disjoint spans") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 30)(rng);
    auto spans = testing::random_disjoint_spans(rng, n, {"PER", "ORG", "LOC", "MISC"});
    CHECK(bio_to_spans(spans_to_bio(n, spans)) == spans);
  }
}

TEST_CASE("linearize orders labels outer to inner") {
  const auto ll = linearize(3, {{0, 2, "PER"}, {0, 3, "ORG"}});
  REQUIRE(ll.size() == 3);
  CHECK(ll.per_token[0] == labels({"B-ORG", "B-PER"}));
  CHECK(ll.per_token[1] == labels({"I-ORG", "I-PER"}));
  CHECK(ll.per_token[2] == labels({"I-ORG"}));
  CHECK(linearize(2, {}).per_token == std::vector<std::vector<Label>>{{}, {}});
  // Identical extents are ordered by etype.
  CHECK(linearize(1, {{0, 1, "PER"}, {0, 1, "LOC"}}).per_token[0] == labels({"B-LOC", "B-PER"}));
}

TEST_CASE("linearize rejects crossing, duplicate and too deep spans") {
  CHECK_THROWS_AS(linearize(4, {{0, 2, "A"}, {1, 3, "B"}}), SpanError);
  CHECK_THROWS_AS(linearize(2, {{0, 1, "A"}, {0, 1, "A"}}), SpanError);
  CHECK_THROWS_AS(linearize(1, {{0, 1, "A"}, {0, 1, "B"}, {0, 1, "C"}}, 2), SpanError);
  CHECK_NOTHROW(linearize(1, {{0, 1, "A"}, {0, 1, "B"}}, 2));
}

TEST_CASE("delinearize inverts linearize and repairs") {
  LinearizedLabels ll{{labels({"B-ORG", "B-PER"}), labels({"I-ORG", "I-PER"}), labels({"I-ORG"})}};
  CHECK(delinearize(ll) == SpanList{{0, 3, "ORG"}, {0, 2, "PER"}});
  CHECK(delinearize(LinearizedLabels{{labels({"I-PER"})}}) == SpanList{{0, 1, "PER"}});
  // Slot 0 changes type: the ORG span closes and its inner PER span closes with it.
  CHECK(delinearize(LinearizedLabels{{labels({"B-ORG", "B-PER"}), labels({"I-LOC", "I-PER"})}}) ==
        SpanList{{0, 1, "ORG"}, {0, 1, "PER"}, {1, 2, "LOC"}, {1, 2, "PER"}});
}

TEST_CASE("linearized depth equals the number of covering spans") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
    auto spans = testing::random_nested_spans(rng, n, 4, {"A", "B", "C"});
    auto ll = linearize(n, spans);
    for (std::size_t t = 0; t < n; ++t) {
      std::size_t covering = 0;
      for (const auto& s : spans) covering += s.start <= t && t < s.end;
      CHECK(ll.per_token[t].size() == covering);
    }
    CHECK(delinearize(ll) == spans);
  }
}

TEST_CASE("delinearize output is non-crossing on random label soup") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> types = {"A", "B"};
  for (int i = 0; i < 3000; ++i) {
    LinearizedLabels ll;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 12)(rng);
    for (std::size_t t = 0; t < n; ++t) {
      auto& stack = ll.per_token.emplace_back();
      const std::size_t depth = std::uniform_int_distribution<std::size_t>(0, 4)(rng);
      for (std::size_t k = 0; k < depth; ++k)
        stack.push_back({std::bernoulli_distribution(0.5)(rng) ? Prefix::Begin : Prefix::Inside,
                         types[std::uniform_int_distribution<std::size_t>(0, 1)(rng)]});
    }
    const auto spans = delinearize(ll);
    // Brute-force pairwise crossing check.
    for (std::size_t a = 0; a < spans.size(); ++a)
      for (std::size_t b = 0; b < spans.size(); ++b) {
        const auto& x = spans[a];
        const auto& y = spans[b];
        const bool crossing = x.start < y.start && y.start < x.end && x.end < y.end;
        CHECK_FALSE(crossing);
      }
  }
}

TEST_CASE("outermost keeps maximal spans and is idempotent") {
  CHECK(outermost({{0, 3, "ORG"}, {0, 2, "PER"}}) == SpanList{{0, 3, "ORG"}});
  CHECK(outermost({}).empty());
  CHECK(outermost({{0, 1, "PER"}, {0, 1, "LOC"}}) == SpanList{{0, 1, "LOC"}});
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    auto spans = testing::random_nested_spans(rng, 15, 4, {"A", "B"});
    auto outer = outermost(spans);
    for (std::size_t a = 0; a + 1 < outer.size(); ++a) CHECK_FALSE(outer[a].overlaps(outer[a + 1]));
    for (const auto& s : spans)
      CHECK(std::any_of(outer.begin(), outer.end(), [&](const EntitySpan& o) { return o.contains(s); }));
    CHECK(outermost(outer) == outer);
  }
}
