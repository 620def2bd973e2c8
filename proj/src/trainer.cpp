#include "nerforge/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace nerforge {

TrainConfig TrainConfig::nested_defaults() {
  TrainConfig c;
  c.frozen_epochs = 20;
  c.frozen_learning_rate = 1e-3;
  c.epochs = 20;
  c.batch_size = 4;
  return c;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (!(peak_learning_rate > 0) || !(frozen_learning_rate > 0)) throw ConfigError("learning rates must be positive");
  if (learning_rate_decay != "cosine")
    throw ConfigError("unsupported learning_rate_decay '" + learning_rate_decay + "'");
  if (epochs + frozen_epochs == 0) throw ConfigError("nothing to train: epochs and frozen_epochs are both 0");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && epsilon > 0))
    throw ConfigError("invalid optimizer parameters");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs},
       {"frozen_epochs", c.frozen_epochs},
       {"frozen_learning_rate", c.frozen_learning_rate},
       {"batch_size", c.batch_size},
       {"peak_learning_rate", c.peak_learning_rate},
       {"warmup_epochs", c.warmup_epochs},
       {"learning_rate_decay", c.learning_rate_decay},
       {"seed", c.seed},
       {"max_depth", c.max_depth},
       {"max_len", c.max_len},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"epsilon", c.epsilon},
       {"clip_norm", c.clip_norm}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.epochs = j.value("epochs", c.epochs);
  c.frozen_epochs = j.value("frozen_epochs", c.frozen_epochs);
  c.frozen_learning_rate = j.value("frozen_learning_rate", c.frozen_learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.peak_learning_rate = j.value("peak_learning_rate", c.peak_learning_rate);
  c.warmup_epochs = j.value("warmup_epochs", c.warmup_epochs);
  c.learning_rate_decay = j.value("learning_rate_decay", c.learning_rate_decay);
  c.seed = j.value("seed", c.seed);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.max_len = j.value("max_len", c.max_len);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
}

std::map<std::string, Real> sqrt_temperature_weights(const std::map<std::string, std::size_t>& sizes) {
  if (sizes.empty()) throw ConfigError("no corpora to sample from");
  Real total = 0;
  for (const auto& [id, n] : sizes) {
    if (n == 0) throw ConfigError("corpus '" + id + "' is empty");
    total += std::sqrt(static_cast<Real>(n));
  }
  std::map<std::string, Real> out;
  for (const auto& [id, n] : sizes) out[id] = std::sqrt(static_cast<Real>(n)) / total;
  return out;
}

TrainCorpus::TrainCorpus(std::string id_, std::string tagset_, std::vector<Document> documents_,
                         std::shared_ptr<const PrecomputedEmbeddings> embeddings_)
    : id(std::move(id_)), tagset(std::move(tagset_)), documents(std::move(documents_)),
      embeddings(std::move(embeddings_)) {
  for (std::size_t d = 0; d < documents.size(); ++d)
    for (std::size_t s = 0; s < documents[d].sentences.size(); ++s)
      if (!documents[d].sentences[s].tokens.empty()) refs.push_back({d, s});
}

std::vector<CorpusWeight> corpus_weights(const std::vector<TrainCorpus>& corpora) {
  std::map<std::string, std::size_t> sizes;
  for (const auto& c : corpora) {
    if (!sizes.emplace(c.id, c.size()).second) throw ConfigError("duplicate corpus id '" + c.id + "'");
  }
  const auto probs = sqrt_temperature_weights(sizes);
  std::vector<CorpusWeight> out;
  for (const auto& c : corpora) out.push_back({c.id, c.size(), probs.at(c.id)});
  return out;
}

std::vector<BatchExample> sample_batch(std::mt19937_64& rng, const std::vector<CorpusWeight>& weights,
                                       const std::vector<TrainCorpus>& corpora, std::size_t batch_size) {
  std::vector<Real> p;
  for (const auto& w : weights) p.push_back(w.probability);
  std::discrete_distribution<std::size_t> pick_corpus(p.begin(), p.end());
  std::vector<BatchExample> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const auto c = pick_corpus(rng);
    std::uniform_int_distribution<std::size_t> pick_sentence(0, corpora[c].size() - 1);
    batch.push_back({c, pick_sentence(rng), corpora[c].id, corpora[c].tagset});
  }
  return batch;
}

Real lr_at(const TrainConfig& config, std::size_t step, std::size_t steps_per_epoch) {
  const std::size_t frozen = config.frozen_epochs * steps_per_epoch;
  if (step < frozen) return config.frozen_learning_rate;
  const std::size_t s = step - frozen;
  const std::size_t total = config.epochs * steps_per_epoch;
  const std::size_t warmup = config.warmup_epochs * steps_per_epoch;
  if (total == 0 || s + 1 >= total) return 0;
  if (s < warmup) return config.peak_learning_rate * static_cast<Real>(s) / static_cast<Real>(warmup);
  const Real progress = static_cast<Real>(s - warmup) / static_cast<Real>(total - 1 - warmup);
  return config.peak_learning_rate * 0.5 * (1 + std::cos(std::numbers::pi * progress));
}

std::size_t steps_per_epoch(const std::vector<TrainCorpus>& corpora, std::size_t batch_size) {
  std::size_t total = 0;
  for (const auto& c : corpora) total += c.size();
  return (total + batch_size - 1) / batch_size;
}

EncoderOutput corpus_embedding(const ModelBundle& model, const TrainCorpus& corpus, std::size_t index) {
  const auto& s = corpus.sentence(index);
  if (corpus.embeddings) {
    const auto& m = corpus.embeddings->lookup(corpus.document_id(index), corpus.refs[index].sentence, s.size());
    if (static_cast<std::size_t>(m.cols()) != model.encoder_config.width)
      throw ShapeError("precomputed embeddings of corpus '" + corpus.id + "' have width " + std::to_string(m.cols()) +
                       ", model expects " + std::to_string(model.encoder_config.width));
    return m;
  }
  return embed(model.encoder, s.words(), model.encoder_config.max_len);
}

std::vector<SpanList> predict_corpus(const ModelBundle& model, const TrainCorpus& corpus) {
  std::vector<SpanList> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto enc = corpus_embedding(model, corpus, i);
    out.push_back(model.kind == ModelKind::Flat ? flat_predict(model.flat, enc, corpus.tagset)
                                                : nested_predict(*model.nested, enc));
  }
  return out;
}

std::vector<SpanList> gold_corpus(const ModelBundle& model, const TrainCorpus& corpus) {
  std::vector<SpanList> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i)
    out.push_back(model.kind == ModelKind::Flat ? corpus.sentence(i).flat_spans : corpus.sentence(i).nested_spans);
  return out;
}

Score evaluate_corpus(const ModelBundle& model, const TrainCorpus& corpus) {
  const auto gold = gold_corpus(model, corpus);
  const auto pred = predict_corpus(model, corpus);
  return model.kind == ModelKind::Flat ? score_flat(gold, pred) : score_nested(gold, pred);
}

std::string history_to_jsonl(const std::vector<HistoryRecord>& history) {
  std::string out;
  for (const auto& r : history) {
    nlohmann::ordered_json j = {{"epoch", r.epoch}, {"corpus", r.corpus}};
    j["loss"] = r.loss ? nlohmann::ordered_json(*r.loss) : nlohmann::ordered_json(nullptr);
    j["precision"] = r.prf.precision();
    j["recall"] = r.prf.recall();
    j["f1"] = r.f1;
    j["frozen"] = r.frozen;
    out += j.dump() + "\n";
  }
  return out;
}

std::size_t select_best_epoch(const std::vector<Real>& scores) {
  if (scores.empty()) throw Error("no epochs to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

namespace {

/// Gold targets precomputed per corpus sentence.
struct Targets {
  std::vector<std::vector<int>> flat;
  std::vector<LinearizedLabels> nested;
};

Targets prepare_targets(const ModelBundle& model, const TrainCorpus& corpus, const TrainConfig& config) {
  Targets t;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& s = corpus.sentence(i);
    if (s.size() > config.max_len)
      throw ConfigError("corpus '" + corpus.id + "' has a sentence of " + std::to_string(s.size()) +
                        " tokens, above max_len " + std::to_string(config.max_len));
    if (model.kind == ModelKind::Flat) {
      const auto& tagset = model.registry.at(corpus.tagset);
      for (const auto& span : s.flat_spans)
        if (!tagset.has_etype(span.etype))
          throw ConfigError("corpus '" + corpus.id + "' uses etype '" + span.etype + "' outside tagset '" +
                            tagset.name() + "'");
      t.flat.push_back(tagset.encode(spans_to_bio(s.size(), s.flat_spans)));
    } else {
      const auto& etypes = model.nested->etypes;
      for (const auto& span : s.nested_spans)
        if (std::find(etypes.begin(), etypes.end(), span.etype) == etypes.end())
          throw ConfigError("corpus '" + corpus.id + "' uses etype '" + span.etype +
                            "' outside the nested inventory");
      t.nested.push_back(linearize(s.size(), s.nested_spans, std::min(config.max_depth, model.nested->max_depth)));
    }
  }
  return t;
}

void check_routing(const ModelBundle& model, const std::vector<TrainCorpus>& corpora) {
  for (const auto& c : corpora) {
    if (model.kind == ModelKind::Flat && !model.registry.contains(c.tagset))
      throw ConfigError("corpus '" + c.id + "' is not mapped to a registered tagset ('" + c.tagset + "')");
    if (c.embeddings && c.embeddings->width() != model.encoder_config.width)
      throw ConfigError("precomputed embeddings of corpus '" + c.id + "' have width " +
                        std::to_string(c.embeddings->width()) + ", model expects " +
                        std::to_string(model.encoder_config.width));
  }
}

template <typename Heads>
Real clip(EncoderParams& enc, Heads& heads, Real max_norm) {
  const Real norm = std::sqrt(squared_norm(enc) + squared_norm(heads));
  if (max_norm > 0 && norm > max_norm) {
    const Real scale = max_norm / norm;
    EncoderParams::visit(enc, [&](std::string_view, Matrix& m) { m *= scale; });
    Heads::visit(heads, [&](std::string_view, Matrix& m) { m *= scale; });
  }
  return norm;
}

template <typename Heads>
TrainResult run(const TrainConfig& config, ModelBundle model, Heads& (*heads_of)(ModelBundle&),
                const std::vector<TrainCorpus>& train_corpora, const std::vector<TrainCorpus>& dev_corpora,
                const TrainHooks& hooks) {
  std::vector<Targets> targets;
  for (const auto& c : train_corpora) targets.push_back(prepare_targets(model, c, config));
  const auto weights = corpus_weights(train_corpora);
  const auto spe = steps_per_epoch(train_corpora, config.batch_size);

  std::mt19937_64 rng(config.seed);
  Adam<EncoderParams> enc_opt(model.encoder);
  Adam<Heads> head_opt(heads_of(model));

  TrainResult result;
  std::size_t step = 0;
  const std::size_t total_epochs = config.frozen_epochs + config.epochs;
  const Real inv_batch = 1 / static_cast<Real>(config.batch_size);

  for (std::size_t epoch = 1; epoch <= total_epochs; ++epoch) {
    const bool frozen = epoch <= config.frozen_epochs;
    model.encoder.frozen = frozen;
    std::vector<Real> loss_sum(train_corpora.size(), 0);
    std::vector<std::size_t> loss_count(train_corpora.size(), 0);

    for (std::size_t b = 0; b < spe; ++b, ++step) {
      const auto batch = sample_batch(rng, weights, train_corpora, config.batch_size);
      EncoderParams enc_grad = zeros_like(model.encoder);
      Heads head_grad = zeros_like(heads_of(model));

      for (const auto& ex : batch) {
        const auto& corpus = train_corpora[ex.corpus];
        const auto& sentence = corpus.sentence(ex.sentence);
        std::optional<EncoderTrace> trace;
        EncoderOutput enc;
        if (corpus.embeddings) {
          enc = corpus_embedding(model, corpus, ex.sentence);
        } else {
          trace = embed_traced(model.encoder, sentence.words());
          enc = trace->output;
        }
        Matrix d_enc;
        Real loss = 0;
        if constexpr (std::is_same_v<Heads, FlatHeads>) {
          auto l = flat_loss(model.flat, enc, corpus.tagset, targets[ex.corpus].flat[ex.sentence]);
          accumulate(head_grad, l.grads, inv_batch);
          loss = l.loss;
          d_enc = std::move(l.d_encoder);
        } else {
          auto l = nested_loss(*model.nested, enc, targets[ex.corpus].nested[ex.sentence]);
          accumulate(head_grad, l.grads, inv_batch);
          loss = l.loss;
          d_enc = std::move(l.d_encoder);
        }
        loss_sum[ex.corpus] += loss;
        ++loss_count[ex.corpus];
        if (trace && !frozen) embed_backward(model.encoder, *trace, d_enc * inv_batch, enc_grad);
      }

      clip(enc_grad, head_grad, config.clip_norm);
      const Real lr = lr_at(config, step, spe);
      head_opt.update(heads_of(model), head_grad, lr, config);
      if (!frozen) enc_opt.update(model.encoder, enc_grad, lr, config);
    }

    std::vector<Real> dev_f1;
    for (const auto& dev : dev_corpora) {
      const auto score = evaluate_corpus(model, dev);
      HistoryRecord rec;
      rec.epoch = epoch;
      rec.corpus = dev.id;
      rec.prf = score.micro;
      rec.f1 = score.micro.f1();
      rec.frozen = frozen;
      for (std::size_t c = 0; c < train_corpora.size(); ++c)
        if (train_corpora[c].id == dev.id && loss_count[c]) rec.loss = loss_sum[c] / static_cast<Real>(loss_count[c]);
      result.history.push_back(rec);
      dev_f1.push_back(rec.f1);
    }
    HistoryRecord macro;
    macro.epoch = epoch;
    macro.corpus = "*macro*";
    macro.frozen = frozen;
    const Real total_count = static_cast<Real>(std::accumulate(loss_count.begin(), loss_count.end(), std::size_t{0}));
    if (total_count > 0) macro.loss = std::accumulate(loss_sum.begin(), loss_sum.end(), Real{0}) / total_count;
    macro.f1 = dev_f1.empty() ? 0 : macro_f1(dev_f1);
    result.history.push_back(macro);
    result.epoch_scores.push_back(macro.f1);

    if (hooks.log) {
      char line[128];
      std::snprintf(line, sizeof line, "epoch %zu%s loss %.5f dev macro F1 %.4f", epoch, frozen ? " (frozen)" : "",
                    macro.loss.value_or(0), macro.f1);
      hooks.log(line);
    }
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, model);

    if (epoch == 1 || macro.f1 > result.best_score) {
      result.best_score = macro.f1;
      result.best_epoch = epoch;
      result.best = model;
      result.best.encoder.frozen = false;
    }
  }
  result.best.metadata["train_config"] = config;
  result.best.metadata["best_epoch"] = result.best_epoch;
  result.best.metadata["best_macro_f1"] = result.best_score;
  return result;
}

FlatHeads& flat_heads_of(ModelBundle& m) { return m.flat; }
NestedHead& nested_head_of(ModelBundle& m) { return *m.nested; }

}  // namespace

TrainResult train(const TrainConfig& config, ModelBundle model, const std::vector<TrainCorpus>& train_corpora,
                  const std::vector<TrainCorpus>& dev_corpora, const TrainHooks& hooks) {
  config.validate();
  if (train_corpora.empty()) throw ConfigError("no training corpora");
  check_routing(model, train_corpora);
  check_routing(model, dev_corpora);
  if (model.kind == ModelKind::Flat) return run<FlatHeads>(config, std::move(model), flat_heads_of, train_corpora, dev_corpora, hooks);
  if (!model.nested) throw ConfigError("nested model without a nested head");
  return run<NestedHead>(config, std::move(model), nested_head_of, train_corpora, dev_corpora, hooks);
}

}  // namespace nerforge
