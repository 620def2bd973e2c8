#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nerforge/evaluator.hpp"
#include "nerforge/model.hpp"

namespace nerforge {

/// Field names follow the usual fine-tuning hyperparameter table. `epochs` counts the
/// fine-tuning epochs that follow `frozen_epochs`.
struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t frozen_epochs = 0;
  Real frozen_learning_rate = 1e-3;
  std::size_t batch_size = 8;
  Real peak_learning_rate = 2e-5;
  std::size_t warmup_epochs = 1;
  std::string learning_rate_decay = "cosine";
  std::uint64_t seed = 42;
  std::size_t max_depth = kDefaultMaxDepth;
  std::size_t max_len = 512;

  // Adam and clipping.
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real epsilon = 1e-8;
  Real clip_norm = 1.0;

  /// Flat multi-corpus defaults.
  static TrainConfig flat_defaults() { return {}; }
  /// Nested defaults (frozen pretraining phase, smaller batches).
  static TrainConfig nested_defaults();

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct CorpusWeight {
  std::string corpus_id;
  std::size_t n_sentences = 0;
  Real probability = 0;
};

/// p(c) = sqrt(n_c) / sum sqrt(n). Throws ConfigError on an empty map or a zero size.
std::map<std::string, Real> sqrt_temperature_weights(const std::map<std::string, std::size_t>& sizes);

/// Training or development data for one corpus. Flat corpora route through `tagset`;
/// nested corpora use the model's nested etypes. When `embeddings` is set, sentences are
/// looked up there instead of running the model's encoder.
struct TrainCorpus {
  struct Ref {
    std::size_t document;
    std::size_t sentence;
  };

  std::string id;
  std::string tagset;
  std::vector<Document> documents;
  std::shared_ptr<const PrecomputedEmbeddings> embeddings;
  std::vector<Ref> refs;

  TrainCorpus() = default;
  TrainCorpus(std::string id, std::string tagset, std::vector<Document> documents,
              std::shared_ptr<const PrecomputedEmbeddings> embeddings = nullptr);

  std::size_t size() const { return refs.size(); }
  const Sentence& sentence(std::size_t i) const { return documents[refs[i].document].sentences[refs[i].sentence]; }
  const std::string& document_id(std::size_t i) const { return documents[refs[i].document].id; }
};

std::vector<CorpusWeight> corpus_weights(const std::vector<TrainCorpus>& corpora);

struct BatchExample {
  std::size_t corpus = 0;    // index into the corpora list
  std::size_t sentence = 0;  // index into that corpus
  std::string corpus_id;
  std::string tagset;
};

/// Each slot draws a corpus by weight (with replacement), then a sentence uniformly.
std::vector<BatchExample> sample_batch(std::mt19937_64& rng, const std::vector<CorpusWeight>& weights,
                                       const std::vector<TrainCorpus>& corpora, std::size_t batch_size);

/// Learning rate at global step `step` (frozen steps first). Frozen phase: constant
/// `frozen_learning_rate`. Afterwards linear warmup from 0 to the peak, then cosine decay
/// reaching 0 at the final step.
Real lr_at(const TrainConfig& config, std::size_t step, std::size_t steps_per_epoch);

/// ceil(total sentences / batch size).
std::size_t steps_per_epoch(const std::vector<TrainCorpus>& corpora, std::size_t batch_size);

/// Encoder output for a corpus sentence (precomputed or computed by the model's encoder).
EncoderOutput corpus_embedding(const ModelBundle& model, const TrainCorpus& corpus, std::size_t index);

/// Span predictions for every sentence of a corpus.
std::vector<SpanList> predict_corpus(const ModelBundle& model, const TrainCorpus& corpus);

/// Gold spans for every sentence of a corpus (flat or nested per the model kind).
std::vector<SpanList> gold_corpus(const ModelBundle& model, const TrainCorpus& corpus);

Score evaluate_corpus(const ModelBundle& model, const TrainCorpus& corpus);

struct HistoryRecord {
  std::size_t epoch = 0;
  std::string corpus;  // "*macro*" for the selection score
  std::optional<Real> loss;
  PRF prf;
  Real f1 = 0;
  bool frozen = false;
};

std::string history_to_jsonl(const std::vector<HistoryRecord>& history);

struct TrainResult {
  ModelBundle best;
  std::size_t best_epoch = 0;
  Real best_score = -1;
  std::vector<HistoryRecord> history;
  std::vector<Real> epoch_scores;
};

struct TrainHooks {
  /// Called after every epoch with the current (not necessarily best) model.
  std::function<void(std::size_t epoch, const ModelBundle&)> on_epoch_end;
  std::function<void(const std::string& line)> log;
};

/// Runs `frozen_epochs` with the encoder frozen, then `epochs` of full fine-tuning. After
/// every epoch each dev corpus is scored (span micro F1) and the unweighted mean selects
/// the checkpoint; ties keep the earlier epoch.
TrainResult train(const TrainConfig& config, ModelBundle model, const std::vector<TrainCorpus>& train_corpora,
                  const std::vector<TrainCorpus>& dev_corpora, const TrainHooks& hooks = {});

/// Index of the first maximum; the selection rule used by `train`.
std::size_t select_best_epoch(const std::vector<Real>& scores);

// Optimizer and gradient plumbing, exposed for tests.

template <typename Params>
struct Adam {
  Params m, v;
  std::size_t steps = 0;

  explicit Adam(const Params& like) : m(zeros_like(like)), v(zeros_like(like)) {}

  void update(Params& params, const Params& grads, Real lr, const TrainConfig& c) {
    ++steps;
    const Real bc1 = 1 - std::pow(c.beta1, static_cast<Real>(steps));
    const Real bc2 = 1 - std::pow(c.beta2, static_cast<Real>(steps));
    auto p = tensors(params);
    auto g = tensors(grads);
    auto mm = tensors(m);
    auto vv = tensors(v);
    for (std::size_t i = 0; i < p.size(); ++i) {
      *mm[i].second = c.beta1 * *mm[i].second + (1 - c.beta1) * *g[i].second;
      *vv[i].second = c.beta2 * *vv[i].second + (1 - c.beta2) * g[i].second->cwiseAbs2();
      p[i].second->array() -= lr * (mm[i].second->array() / bc1) /
                              ((vv[i].second->array() / bc2).sqrt() + c.epsilon);
    }
  }
};

}  // namespace nerforge
