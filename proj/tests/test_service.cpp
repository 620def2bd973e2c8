#include "doctest.h"

#include <filesystem>
#include <future>

#include "nerforge/annotate.hpp"
#include "nerforge/corpus_io.hpp"
#include "nerforge/tokenizer.hpp"
#include "service_fixture.hpp"
#include "toy.hpp"

using namespace nerforge;

namespace {

ModelBundle flat_model(std::uint64_t seed = 3, const std::string& name = "flat") {
  return make_flat_model(name, testing::two_tagsets(), testing::tiny_encoder(), seed);
}

ModelBundle nested_model(std::uint64_t seed = 3) {
  return make_nested_model("nested", {"LOC", "ORG", "PER"}, testing::tiny_encoder(), testing::tiny_nested(), seed);
}

// A flat model trained to tag "John Smith" as PER.
ModelBundle john_smith_model() {
  std::vector<Sentence> sentences;
  for (const auto& words : std::vector<std::vector<std::string>>{{"John", "Smith", "runs", "."},
                                                                 {"Mary", "saw", "John", "Smith", "."},
                                                                 {"runs", "John", "Smith"},
                                                                 {"Smith", "runs", "."},
                                                                 {"John", "walks", "."}}) {
    sentences.push_back(make_sentence(words));
    for (std::size_t i = 0; i + 1 < words.size(); ++i)
      if (words[i] == "John" && words[i + 1] == "Smith") sentences.back().flat_spans.push_back({i, i + 2, "PER"});
  }
  TagsetRegistry reg;
  reg.add(Tagset("conll", {"PER", "ORG", "LOC", "MISC"}));
  auto cfg = testing::quick_config(40);
  cfg.batch_size = 2;
  cfg.peak_learning_rate = 1e-2;
  const TrainCorpus corpus("c", "conll", {testing::as_document(sentences)});
  return train(cfg, make_flat_model("js", reg, testing::tiny_encoder(16), 1), {corpus}, {corpus}).best;
}

nlohmann::json body_of(const Reply& r) { return nlohmann::json::parse(r.body); }

}  // namespace

TEST_CASE("model listing") {
  CHECK(list_models(ModelSnapshot{}) == nlohmann::json::array());
  auto reg = load_registry_file(NERFORGE_SOURCE_DIR "/configs/tagsets.json");
  auto model = make_flat_model("multi", reg, testing::tiny_encoder(), 1);
  model.languages = {"en", "cs"};
  const auto snap = make_snapshot({model, nested_model()});
  const auto listing = list_models(*snap);
  CHECK(listing == list_models(*snap));
  REQUIRE(listing.size() == 2);
  CHECK(listing[0] == nlohmann::json({{"name", "multi"}, {"type", "flat"}, {"tagsets", {"conll", "uner", "onto"}},
                                      {"languages", {"en", "cs"}}}));
  CHECK(listing[1]["type"] == "nested");
  CHECK(listing[1]["tagsets"] == nlohmann::json::array());
  CHECK_THROWS_AS(make_snapshot({model, model}), ConfigError);
}

TEST_CASE("request parsing") {
  const auto r = parse_recognize_request(R"({"data":"x","model":"m","tagset":"t","input":"conll","output":"vertical"})");
  CHECK(r.data == "x");
  CHECK(r.model == "m");
  CHECK(r.tagset == "t");
  CHECK(r.input == "conll");
  CHECK(r.output == "vertical");
  const auto d = parse_recognize_request(R"({"data":"x"})");
  CHECK(d.input == "plain");
  CHECK(d.output == "json");
  CHECK_THROWS_AS(parse_recognize_request("{"), ParseError);
  CHECK_THROWS_AS(parse_recognize_request("[1]"), ConfigError);
  CHECK_THROWS_AS(parse_recognize_request(R"({"data": 5})"), ConfigError);
}

TEST_CASE("recognize error statuses") {
  const auto snap = make_snapshot({flat_model(), nested_model()});
  RecognizeRequest req;
  req.data = "John runs .";
  req.model = "missing";
  CHECK(recognize(*snap, req).status == 404);
  req.model = "flat";
  req.tagset = "onto";
  CHECK(recognize(*snap, req).status == 400);
  req.model = "nested";
  req.tagset = "news";
  CHECK(recognize(*snap, req).status == 400);
  req.tagset = "";
  req.output = "xml";
  CHECK(recognize(*snap, req).status == 400);
  req.output = "json";
  req.input = "pdf";
  CHECK(recognize(*snap, req).status == 400);
  req.input = "plain";
  req.data = std::string(2000, 'a');
  CHECK(recognize(*snap, req, 1000).status == 413);
  CHECK(recognize(*snap, req, 2000).status == 200);
  CHECK(recognize_body(*snap, "not json").status == 400);
  CHECK(recognize_body(*snap, std::string(50, ' '), 10).status == 413);
  CHECK(recognize(ModelSnapshot{}, RecognizeRequest{}).status == 404);
  CHECK(body_of(recognize(*snap, {"x", "nope"})).contains("error"));
}

TEST_CASE("empty data succeeds with no sentences") {
  const auto snap = make_snapshot({flat_model()});
  const auto reply = recognize(*snap, RecognizeRequest{});
  CHECK(reply.status == 200);
  CHECK(body_of(reply) == nlohmann::json({{"model", "flat"}, {"tagset", "news"}, {"sentences", nlohmann::json::array()}}));
  RecognizeRequest vertical;
  vertical.output = "vertical";
  CHECK(recognize(*snap, vertical).body.empty());
}

TEST_CASE("vertical output for a model that tags John Smith") {
  const auto model = john_smith_model();
  const std::vector<std::string> words = {"John", "Smith", "runs", "."};
  REQUIRE(predict_sentence(model, words, "conll") == SpanList{{0, 2, "PER"}});
  const auto snap = make_snapshot({model});
  RecognizeRequest req{"John Smith runs .", "js", "conll", "plain", "vertical"};
  const auto reply = recognize(*snap, req);
  CHECK(reply.status == 200);
  CHECK(reply.content_type.rfind("text/plain", 0) == 0);
  CHECK(reply.body == "1,2\tPER\tJohn Smith\n");
  req.output = "conll";
  CHECK(recognize(*snap, req).body == "John\tB-PER\nSmith\tI-PER\nruns\tO\n.\tO\n\n");
}

TEST_CASE("recognize matches direct library prediction") {
  const auto flat = flat_model(4);
  const auto nested = nested_model(4);
  const auto snap = make_snapshot({flat, nested});
  testing::SyntheticText gen(21);
  for (int i = 0; i < 40; ++i) {
    const auto& model = i % 2 ? nested : flat;
    auto req = parse_recognize_request(testing::random_request(gen, model).dump());
    req.output = "json";
    const auto reply = recognize(*snap, req);
    REQUIRE(reply.status == 200);
    const auto j = body_of(reply);
    std::vector<Sentence> sentences;
    if (req.input == "plain") {
      sentences = tokenize_plain(req.data);
    } else {
      for (const auto& d : parse_conll_tokens(req.data)) sentences.insert(sentences.end(), d.sentences.begin(), d.sentences.end());
    }
    REQUIRE(j["sentences"].size() == sentences.size());
    const auto tagset = resolve_tagset(model, req.tagset);
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      CHECK(j["sentences"][s]["tokens"] == sentences[s].words());
      SpanList got;
      for (const auto& span : j["sentences"][s]["spans"]) {
        got.push_back({span["start"], span["end"], span["type"]});
        CHECK(span["text"] == span_text(sentences[s], got.back()));
      }
      CHECK(got == predict_tokens(model, sentences[s].words(), tagset));
    }
  }
}

TEST_CASE("HTTP endpoints") {
  ModelStore store(make_snapshot({flat_model(), nested_model()}));
  testing::RunningServer server(store, {4096, ""});
  auto cli = server.client();

  auto models = cli.Get("/models");
  REQUIRE(models);
  CHECK(models->status == 200);
  CHECK(nlohmann::json::parse(models->body) == list_models(*store.snapshot()));

  auto page = cli.Get("/");
  REQUIRE(page);
  CHECK(page->status == 200);
  CHECK(page->body.find("/recognize") != std::string::npos);

  const std::string body = R"({"data":"Kalorason saw MIRA .","model":"flat","tagset":"bio"})";
  auto rec = cli.Post("/recognize", body, "application/json");
  REQUIRE(rec);
  CHECK(rec->status == 200);
  CHECK(rec->body == recognize_body(*store.snapshot(), body).body);

  auto missing = cli.Post("/recognize", R"({"data":"x","model":"zzz"})", "application/json");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  auto bad_tagset = cli.Post("/recognize", R"({"data":"x","model":"flat","tagset":"zzz"})", "application/json");
  REQUIRE(bad_tagset);
  CHECK(bad_tagset->status == 400);
  auto big = cli.Post("/recognize", nlohmann::json{{"data", std::string(10000, 'a')}}.dump(), "application/json");
  REQUIRE(big);
  CHECK(big->status == 413);
}

TEST_CASE("static directory is served at the root") {
  const auto dir = std::filesystem::temp_directory_path() / "nerforge_static_test";
  std::filesystem::create_directories(dir);
  write_file((dir / "index.html").string(), "<p>ui</p>");
  ModelStore store;
  {
    testing::RunningServer server(store, {kDefaultMaxPayload, dir.string()});
    auto cli = server.client();
    auto page = cli.Get("/");
    REQUIRE(page);
    CHECK(page->body == "<p>ui</p>");
    auto models = cli.Get("/models");
    REQUIRE(models);
    CHECK(models->body == "[]");
  }
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(Server(store, {kDefaultMaxPayload, "/nonexistent/static"}), ConfigError);
}

TEST_CASE("concurrent requests match serial results") {
  ModelStore store(make_snapshot({flat_model(), nested_model()}));
  testing::RunningServer server(store);
  testing::SyntheticText gen(8);
  std::vector<std::string> bodies;
  std::vector<std::string> expected;
  for (int i = 0; i < 32; ++i) {
    const auto& model = *store.snapshot()->models.at(i % 3 ? "flat" : "nested");
    bodies.push_back(testing::random_request(gen, model).dump());
    auto cli = server.client();
    auto res = cli.Post("/recognize", bodies.back(), "application/json");
    REQUIRE(res);
    expected.push_back(res->body);
  }
  std::vector<std::future<std::string>> futures;
  for (const auto& body : bodies) {
    futures.push_back(std::async(std::launch::async, [&server, body] {
      auto cli = server.client();
      auto res = cli.Post("/recognize", body, "application/json");
      return res ? res->body : std::string("<no response: ") + httplib::to_string(res.error()) + ">";
    }));
  }
  for (std::size_t i = 0; i < futures.size(); ++i) CHECK(futures[i].get() == expected[i]);
}

TEST_CASE("reloads swap snapshots atomically") {
  const auto a = make_snapshot({flat_model(1, "m")});
  const auto b = make_snapshot({flat_model(2, "m")});
  const std::string body =
      R"({"data":"Kalorason saw MIRA in Tesuburg . Then Rasuson left . Minova met NOTE .","model":"m","output":"vertical"})";
  const auto from_a = recognize_body(*a, body).body;
  const auto from_b = recognize_body(*b, body).body;
  REQUIRE(from_a != from_b);

  ModelStore store(a);
  testing::RunningServer server(store);
  std::atomic<bool> done{false};
  std::thread swapper([&] {
    for (int i = 0; !done; ++i) {
      store.replace(i % 2 ? a : b);
      std::this_thread::sleep_for(std::chrono::microseconds(200));
    }
  });
  std::vector<std::future<std::vector<std::string>>> workers;
  for (int w = 0; w < 4; ++w) {
    workers.push_back(std::async(std::launch::async, [&] {
      std::vector<std::string> out;
      auto cli = server.client();
      for (int i = 0; i < 25; ++i) {
        auto res = cli.Post("/recognize", body, "application/json");
        out.push_back(res ? res->body : "<no response>");
      }
      return out;
    }));
  }
  std::size_t seen_a = 0, seen_b = 0;
  for (auto& f : workers) {
    for (const auto& r : f.get()) {
      CHECK((r == from_a || r == from_b));
      seen_a += r == from_a;
      seen_b += r == from_b;
    }
  }
  done = true;
  swapper.join();
  CHECK(seen_a + seen_b == 100);
}

TEST_CASE("admin reload rereads checkpoints and keeps the old snapshot on failure") {
  const auto path = (std::filesystem::temp_directory_path() / "nerforge_reload_test.ckpt").string();
  save_checkpoint(flat_model(1, "m"), path);
  ModelStore store(std::vector<std::string>{path});
  testing::RunningServer server(store);
  auto cli = server.client();
  const std::string body = R"({"data":"Kalorason saw MIRA in Tesuburg .","model":"m","output":"vertical"})";
  const auto before = cli.Post("/recognize", body, "application/json")->body;
  CHECK(before == recognize_body(*make_snapshot({flat_model(1, "m")}), body).body);

  save_checkpoint(flat_model(2, "m"), path);
  auto reload = cli.Post("/admin/reload", "", "application/json");
  REQUIRE(reload);
  CHECK(reload->status == 200);
  const auto after = cli.Post("/recognize", body, "application/json")->body;
  CHECK(after == recognize_body(*make_snapshot({flat_model(2, "m")}), body).body);

  write_file(path, "garbage");
  auto failed = cli.Post("/admin/reload", "", "application/json");
  REQUIRE(failed);
  CHECK(failed->status == 500);
  CHECK(cli.Post("/recognize", body, "application/json")->body == after);
  std::filesystem::remove(path);
}
