// nerforge command line: train, predict, eval, serve.
//
// Every option can also come from an environment variable named NERFORGE_<OPTION>
// (upper case, dashes as underscores), e.g. NERFORGE_PORT=9000. Command-line flags win
// over the environment, which wins over values from --config.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nerforge/annotate.hpp"
#include "nerforge/corpus_io.hpp"
#include "nerforge/evaluator.hpp"
#include "nerforge/experiment.hpp"
#include "nerforge/service.hpp"

namespace {

using namespace nerforge;

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  return read_file(path);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text << std::flush;
  else write_file(path, text);
}

// Values from a "section" of the --config JSON fill options not set on the command line
// or environment.
nlohmann::json config_section(const std::string& path, const char* section) {
  if (path.empty()) return nlohmann::json::object();
  const auto j = nlohmann::json::parse(read_file(path));
  return j.value(section, nlohmann::json::object());
}

template <typename T>
void fill(const nlohmann::json& section, const char* key, CLI::Option* opt, T& value) {
  if (opt->count() == 0 && section.contains(key)) value = section[key].get<T>();
}

std::vector<SpanList> read_spans(const std::string& path, const std::string& format, bool nested) {
  std::vector<SpanList> out;
  for (const auto& d : read_annotated(path, format))
    for (const auto& s : d.sentences) out.push_back(nested ? s.nested_spans : s.flat_spans);
  return out;
}

Server* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nerforge: flat and nested named entity recognition"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string config, model_path, tagset, input = "plain", output = "json", in_path = "-", out_path = "-";
  std::string history_path, gold_path, pred_path, format = "conll", records_path, host = "127.0.0.1", static_dir;
  std::vector<std::string> model_paths;
  std::uint64_t seed = 0;
  int port = 8080;
  std::size_t max_payload = kDefaultMaxPayload;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON config file")->envname("NERFORGE_CONFIG");
    return sub->add_option("--seed", seed, "random seed")->envname("NERFORGE_SEED");
  };

  auto* train_cmd = app.add_subcommand("train", "train a model from an experiment config");
  auto* train_seed = add_common(train_cmd);
  train_cmd->add_option("--model", model_path, "output checkpoint path")->required()->envname("NERFORGE_MODEL");
  train_cmd->add_option("--history", history_path, "write per-epoch JSONL history here")->envname("NERFORGE_HISTORY");

  auto* predict_cmd = app.add_subcommand("predict", "annotate a file");
  add_common(predict_cmd);
  predict_cmd->add_option("--model", model_path, "checkpoint")->required()->envname("NERFORGE_MODEL");
  auto* p_tagset = predict_cmd->add_option("--tagset", tagset, "tagset (flat models)")->envname("NERFORGE_TAGSET");
  auto* p_input = predict_cmd->add_option("--input", input, "plain or conll")
                      ->check(CLI::IsMember({"plain", "conll"}))->envname("NERFORGE_INPUT");
  auto* p_output = predict_cmd->add_option("--output", output, "json, conll or vertical")
                       ->check(CLI::IsMember({"json", "conll", "vertical"}))->envname("NERFORGE_OUTPUT");
  predict_cmd->add_option("--in", in_path, "input file (- for stdin)")->envname("NERFORGE_IN");
  predict_cmd->add_option("--out", out_path, "output file (- for stdout)")->envname("NERFORGE_OUT");

  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold annotations");
  add_common(eval_cmd);
  eval_cmd->add_option("--gold", gold_path, "gold file")->required()->envname("NERFORGE_GOLD");
  eval_cmd->add_option("--pred", pred_path, "predicted file")->envname("NERFORGE_PRED");
  eval_cmd->add_option("--model", model_path, "predict the gold tokens with this checkpoint instead of --pred")
      ->envname("NERFORGE_MODEL");
  eval_cmd->add_option("--tagset", tagset, "tagset when predicting with --model")->envname("NERFORGE_TAGSET");
  auto* e_format = eval_cmd->add_option("--format", format, "conll or nested")
                       ->check(CLI::IsMember({"conll", "nested"}))->envname("NERFORGE_FORMAT");
  eval_cmd->add_option("--records", records_path, "write JSONL score records here")->envname("NERFORGE_RECORDS");

  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP annotation service");
  add_common(serve_cmd);
  auto* s_models = serve_cmd->add_option("--model", model_paths, "checkpoint (repeatable)")
                       ->envname("NERFORGE_MODEL")->delimiter(',');
  auto* s_host = serve_cmd->add_option("--host", host, "bind address")->envname("NERFORGE_HOST");
  auto* s_port = serve_cmd->add_option("--port", port, "port (0 = any free port)")->envname("NERFORGE_PORT");
  auto* s_static = serve_cmd->add_option("--static-dir", static_dir, "directory served at /")->envname("NERFORGE_STATIC_DIR");
  auto* s_payload = serve_cmd->add_option("--max-payload", max_payload, "request size limit in bytes")
                        ->envname("NERFORGE_MAX_PAYLOAD");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      if (config.empty()) throw ConfigError("train needs --config");
      auto ex = load_experiment_file(config, train_seed->count() ? std::optional<std::uint64_t>(seed) : std::nullopt);
      TrainHooks hooks;
      hooks.log = [](const std::string& line) { std::cerr << line << '\n'; };
      auto result = train(ex.training, std::move(ex.model), ex.train, ex.dev, hooks);
      save_checkpoint(result.best, model_path);
      if (!history_path.empty()) write_file(history_path, history_to_jsonl(result.history));
      std::cout << "best epoch " << result.best_epoch << " macro F1 " << result.best_score << '\n';
      return 0;
    }

    if (predict_cmd->parsed()) {
      const auto section = config_section(config, "predict");
      fill(section, "tagset", p_tagset, tagset);
      fill(section, "input", p_input, input);
      fill(section, "output", p_output, output);
      const auto snapshot = make_snapshot({load_checkpoint(model_path)});
      RecognizeRequest req{read_input(in_path), "", tagset, input, output};
      const auto reply = recognize(*snapshot, req, std::numeric_limits<std::size_t>::max());
      if (reply.status != 200) {
        std::cerr << "error: " << nlohmann::json::parse(reply.body).value("error", reply.body) << '\n';
        return 2;
      }
      write_output(out_path, output == "json" ? reply.body + "\n" : reply.body);
      return 0;
    }

    if (eval_cmd->parsed()) {
      fill(config_section(config, "eval"), "format", e_format, format);
      const bool nested = format == "nested";
      const auto gold = read_spans(gold_path, format, nested);
      std::vector<SpanList> pred;
      if (!pred_path.empty()) {
        pred = read_spans(pred_path, format, nested);
      } else if (!model_path.empty()) {
        const auto model = load_checkpoint(model_path);
        const auto resolved = resolve_tagset(model, tagset);
        for (const auto& d : read_annotated(gold_path, format))
          for (const auto& s : d.sentences) pred.push_back(predict_tokens(model, s.words(), resolved));
      } else {
        throw ConfigError("eval needs --pred or --model");
      }
      const auto score = nested ? score_nested(gold, pred) : score_flat(gold, pred);
      std::cout << format_report("eval", score);
      if (!records_path.empty()) write_file(records_path, format_records("eval", score));
      return 0;
    }

    if (serve_cmd->parsed()) {
      const auto section = config_section(config, "serve");
      fill(section, "models", s_models, model_paths);
      fill(section, "host", s_host, host);
      fill(section, "port", s_port, port);
      fill(section, "static_dir", s_static, static_dir);
      fill(section, "max_payload", s_payload, max_payload);
      ModelStore store(model_paths);
      Server server(store, {max_payload, static_dir});
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
      std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
      std::cout << "listening on " << host << ':' << bound << std::endl;
      server.listen();
      g_server = nullptr;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
