#include "doctest.h"

#include "nerforge/tagset.hpp"
#include "nerforge/types.hpp"

using namespace nerforge;

TEST_CASE("conll tagset has nine labels with O at id 0") {
  auto reg = parse_registry(R"({"version": 1, "tagsets": [{"name": "conll", "etypes": ["PER", "ORG", "LOC", "MISC"]}]})");
  const auto& t = reg.at("conll");
  CHECK(t.num_labels() == 9);
  CHECK(t.id("O") == 0);
  CHECK(t.id("B-PER") == 1);
  CHECK(t.id("I-PER") == 2);
  CHECK(t.id("I-MISC") == 8);
  for (int i = 0; i < 9; ++i) CHECK(t.id(t.label(i)) == i);
}

TEST_CASE("single etype gives three labels") {
  Tagset t("one", {"X"});
  CHECK(t.decode(std::vector<int>{0, 1, 2}) == std::vector<std::string>{"O", "B-X", "I-X"});
}

TEST_CASE("registry rejects duplicates") {
  CHECK_THROWS_AS(parse_registry(R"({"tagsets": [{"name": "a", "etypes": ["X"]}, {"name": "a", "etypes": ["Y"]}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_registry(R"({"tagsets": [{"name": "a", "etypes": ["X", "X"]}]})"), ConfigError);
  CHECK_THROWS_AS(parse_registry(R"({"tagsets": [{"name": "a", "etypes": ["X Y"]}]})"), ConfigError);
  CHECK_THROWS_AS(parse_registry(R"({"version": 2, "tagsets": []})"), ConfigError);
  CHECK_THROWS_AS(parse_registry("not json"), ConfigError);
}

TEST_CASE("label ids are stable across loads and round trip through JSON") {
  const char* text = R"({"tagsets": [{"name": "b", "etypes": ["Z", "A"]}, {"name": "a", "etypes": ["M"]}]})";
  auto r1 = parse_registry(text);
  auto r2 = load_registry(registry_to_json(r1));
  CHECK(r1 == r2);
  CHECK(r1.names() == std::vector<std::string>{"b", "a"});
  CHECK(r1.at("b").id("B-Z") == 1);
  CHECK_THROWS_AS(r1.at("nope"), RoutingError);
}

TEST_CASE("validate_labels checks the id range") {
  Tagset t("conll", {"PER", "ORG", "LOC", "MISC"});
  CHECK(validate_labels(t, std::vector<int>{0, 1, 8}));
  CHECK_FALSE(validate_labels(t, std::vector<int>{9}));
  CHECK_FALSE(validate_labels(t, std::vector<int>{-1}));
  CHECK(validate_labels(t, std::vector<int>{}));
  CHECK_THROWS_AS(t.id("B-GPE"), LookupError);
}

TEST_CASE("shipped default tagset config loads") {
  auto reg = load_registry_file(NERFORGE_SOURCE_DIR "/configs/tagsets.json");
  CHECK(reg.names() == std::vector<std::string>{"conll", "uner", "onto"});
  CHECK(reg.at("conll").etypes() == std::vector<std::string>{"PER", "ORG", "LOC", "MISC"});
}
