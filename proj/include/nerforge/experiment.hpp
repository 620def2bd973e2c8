#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nerforge/trainer.hpp"

namespace nerforge {

/// A training run described by a JSON config:
///
///   {"training": {TrainConfig fields},
///    "model": {"name", "type": "flat"|"nested", "encoder": {...}, "nested": {...},
///              "tagsets": path or registry object (flat), "etypes": [...] (nested, optional),
///              "seed": initialization seed (defaults to training.seed)},
///    "corpora": [{"id", "train", "dev", "format": "conll"|"nested", "tagset", "language",
///                 "token_column", "label_column", "label_map": {"FROM": "TO" | null},
///                 "embeddings": {"train": path, "dev": path}}]}
///
/// Relative paths resolve against `base_dir`. Nested models without "etypes" use the sorted
/// union of training etypes. Flat models read nested files through their outermost spans.
struct Experiment {
  TrainConfig training;
  ModelBundle model;
  std::vector<TrainCorpus> train;
  std::vector<TrainCorpus> dev;
};

Experiment load_experiment(const nlohmann::json& config, const std::string& base_dir,
                           std::optional<std::uint64_t> seed_override = std::nullopt);
Experiment load_experiment_file(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt);

/// Reads an annotated file in "conll" (flat BIO columns) or "nested" format. Flat files fill
/// both span lists, nested files fill nested spans and their outermost flat projection.
std::vector<Document> read_annotated(const std::string& path, const std::string& format, int token_column = 0,
                                     int label_column = -1);

}  // namespace nerforge
