#include "nerforge/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "nerforge/corpus_io.hpp"

namespace nerforge {
namespace {

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base) / path).string();
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  try {
    return j.value(key, fallback);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

std::vector<Document> read_annotated(const std::string& path, const std::string& format, int token_column,
                                     int label_column) {
  const auto text = read_file(path);
  std::vector<Document> docs;
  if (format == "conll") {
    docs = parse_flat_conll(text, token_column, label_column);
    for (auto& d : docs)
      for (auto& s : d.sentences) s.nested_spans = s.flat_spans;
  } else if (format == "nested") {
    docs = parse_nested(text);
    for (auto& d : docs) d = flatten_to_outermost(d);
  } else {
    throw ConfigError("unknown corpus format '" + format + "' (expected conll or nested)");
  }
  return docs;
}

Experiment load_experiment(const nlohmann::json& config, const std::string& base_dir,
                           std::optional<std::uint64_t> seed_override) {
  if (!config.is_object()) throw ConfigError("experiment config must be a JSON object");
  const auto model_cfg = config.value("model", nlohmann::json::object());
  const ModelKind kind = parse_model_kind(get_or<std::string>(model_cfg, "type", "flat"));

  Experiment ex;
  ex.training = kind == ModelKind::Nested ? TrainConfig::nested_defaults() : TrainConfig::flat_defaults();
  try {
    if (config.contains("training")) from_json(config.at("training"), ex.training);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("training section: ") + e.what());
  }
  if (seed_override) ex.training.seed = *seed_override;
  ex.training.validate();

  if (!config.contains("corpora") || !config["corpora"].is_array() || config["corpora"].empty())
    throw ConfigError("config needs a non-empty 'corpora' list");

  std::vector<std::string> languages;
  std::set<std::string> train_etypes;
  for (const auto& c : config["corpora"]) {
    const auto id = get_or<std::string>(c, "id", "");
    if (id.empty()) throw ConfigError("every corpus needs an 'id'");
    const auto format = get_or<std::string>(c, "format", "conll");
    const auto tagset = kind == ModelKind::Flat ? get_or<std::string>(c, "tagset", "") : std::string();
    if (kind == ModelKind::Flat && tagset.empty()) throw ConfigError("corpus '" + id + "' needs a 'tagset'");
    const int token_col = get_or<int>(c, "token_column", 0);
    const int label_col = get_or<int>(c, "label_column", -1);
    LabelMapping mapping;
    const auto label_map = c.value("label_map", nlohmann::json::object());
    for (const auto& [from, to] : label_map.items()) {
      if (!to.is_null() && !to.is_string()) throw ConfigError("label_map values must be strings or null");
      mapping[from] = to.is_null() ? std::nullopt : std::optional<std::string>(to.get<std::string>());
    }
    const auto emb = c.value("embeddings", nlohmann::json::object());

    auto load_split = [&](const char* split) -> std::optional<TrainCorpus> {
      const auto path = get_or<std::string>(c, split, "");
      if (path.empty()) return std::nullopt;
      auto docs = read_annotated(resolve(base_dir, path), format, token_col, label_col);
      for (auto& d : docs) {
        d = map_labels(d, mapping);
        d.corpus_id = id;
        d.language = get_or<std::string>(c, "language", "");
      }
      std::shared_ptr<const PrecomputedEmbeddings> embeddings;
      if (emb.contains(split))
        embeddings = std::make_shared<const PrecomputedEmbeddings>(
            PrecomputedEmbeddings::load(resolve(base_dir, emb[split].get<std::string>())));
      return TrainCorpus(id, tagset, std::move(docs), std::move(embeddings));
    };
    auto train = load_split("train");
    if (!train) throw ConfigError("corpus '" + id + "' needs a 'train' file");
    for (std::size_t i = 0; i < train->size(); ++i)
      for (const auto& s : train->sentence(i).nested_spans) train_etypes.insert(s.etype);
    ex.train.push_back(std::move(*train));
    if (auto dev = load_split("dev")) ex.dev.push_back(std::move(*dev));

    const auto lang = get_or<std::string>(c, "language", "");
    if (!lang.empty() && std::find(languages.begin(), languages.end(), lang) == languages.end()) languages.push_back(lang);
  }
  if (ex.dev.empty()) throw ConfigError("at least one corpus needs a 'dev' file for checkpoint selection");

  EncoderConfig enc;
  NestedHeadConfig nested;
  try {
    if (model_cfg.contains("encoder")) from_json(model_cfg["encoder"], enc);
    if (model_cfg.contains("nested")) from_json(model_cfg["nested"], nested);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model section: ") + e.what());
  }
  const auto name = get_or<std::string>(model_cfg, "name", "model");
  const auto seed = seed_override ? *seed_override : get_or<std::uint64_t>(model_cfg, "seed", ex.training.seed);

  if (kind == ModelKind::Flat) {
    if (!model_cfg.contains("tagsets")) throw ConfigError("flat model needs 'tagsets' (path or registry object)");
    const auto& t = model_cfg["tagsets"];
    auto registry = t.is_string() ? load_registry_file(resolve(base_dir, t.get<std::string>())) : load_registry(t);
    ex.model = make_flat_model(name, std::move(registry), enc, seed);
  } else {
    std::vector<std::string> etypes;
    if (model_cfg.contains("etypes")) etypes = model_cfg["etypes"].get<std::vector<std::string>>();
    else etypes.assign(train_etypes.begin(), train_etypes.end());
    if (etypes.empty()) throw ConfigError("nested model has no entity types");
    ex.model = make_nested_model(name, std::move(etypes), enc, nested, seed);
  }
  ex.model.languages = std::move(languages);
  return ex;
}

Experiment load_experiment_file(const std::string& path, std::optional<std::uint64_t> seed_override) {
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return load_experiment(config, std::filesystem::path(path).parent_path().string(), seed_override);
}

}  // namespace nerforge
