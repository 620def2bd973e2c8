#pragma once

// Small models and corpora that train in well under a second.

#include "nerforge/model.hpp"
#include "nerforge/trainer.hpp"
#include "synthetic.hpp"

namespace nerforge::testing {

inline EncoderConfig tiny_encoder(std::size_t width = 8) {
  EncoderConfig c;
  c.width = width;
  c.buckets = 256;
  c.max_relative = 2;
  c.max_len = 64;
  return c;
}

inline NestedHeadConfig tiny_nested() {
  NestedHeadConfig c;
  c.hidden = 8;
  c.label_dim = 4;
  return c;
}

inline TagsetRegistry two_tagsets() {
  TagsetRegistry r;
  r.add(Tagset("news", {"PER", "ORG", "LOC", "MISC"}));
  r.add(Tagset("bio", {"DRUG", "GENE"}));
  return r;
}

inline TrainCorpus flat_corpus(const std::string& id, const std::string& tagset, std::uint64_t seed, std::size_t n,
                               const std::vector<std::string>& etypes) {
  return TrainCorpus(id, tagset, {as_document(flat_synthetic(seed, n, etypes), id)});
}

inline TrainCorpus nested_corpus(const std::string& id, std::uint64_t seed, std::size_t n) {
  return TrainCorpus(id, "", {as_document(nested_synthetic(seed, n), id)});
}

inline TrainConfig quick_config(std::size_t epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 4;
  c.peak_learning_rate = 5e-3;
  c.seed = 3;
  return c;
}

inline std::string tensor_bytes(const auto& params) {
  std::string out;
  for (const auto& [name, m] : tensors(params)) {
    out += name;
    out.append(reinterpret_cast<const char*>(m->data()), static_cast<std::size_t>(m->size()) * sizeof(Real));
  }
  return out;
}

}  // namespace nerforge::testing
