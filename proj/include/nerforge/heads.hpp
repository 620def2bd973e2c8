#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nerforge/encoder.hpp"
#include "nerforge/span_codec.hpp"
#include "nerforge/tagset.hpp"

namespace nerforge {

// ---------------------------------------------------------------------------
// Flat NER: one affine softmax head per tagset.

struct FlatHead {
  Tagset tagset;
  Matrix weight;  // d x |labels|
  Matrix bias;    // |labels| x 1
};

/// Heads in registry order. Inference routes through the requested tagset's head only,
/// so predicted labels always belong to that tagset.
struct FlatHeads {
  std::vector<FlatHead> heads;

  const FlatHead& at(std::string_view tagset) const;
  FlatHead& at(std::string_view tagset);
  std::size_t index_of(std::string_view tagset) const;

  template <typename Self, typename F>
  static void visit(Self& s, F&& f) {
    for (auto& h : s.heads) {
      f(h.tagset.name() + ".weight", h.weight);
      f(h.tagset.name() + ".bias", h.bias);
    }
  }
};

FlatHeads init_flat_heads(const TagsetRegistry& registry, std::size_t width, std::mt19937_64& rng,
                          Real init_scale = 0.1);

/// Logits (n_tokens x |labels(tagset)|). Throws RoutingError for unknown tagsets.
Matrix flat_forward(const FlatHeads& heads, const EncoderOutput& enc, std::string_view tagset);

/// Per-token argmax label ids.
std::vector<int> flat_argmax(const Matrix& logits);

/// Argmax decode followed by BIO repair.
SpanList flat_predict(const FlatHeads& heads, const EncoderOutput& enc, std::string_view tagset);

struct FlatLoss {
  Real loss = 0;
  FlatHeads grads;      // same layout as the heads; non-routed heads stay exactly zero
  Matrix d_encoder;     // n_tokens x d
};

/// Mean token cross-entropy against gold label ids. Throws LookupError for ids outside the
/// tagset and ShapeError when the gold length differs from the token count.
FlatLoss flat_loss(const FlatHeads& heads, const EncoderOutput& enc, std::string_view tagset,
                   const std::vector<int>& gold);

// ---------------------------------------------------------------------------
// Nested NER: per-token seq2seq label decoder with hard attention on the current token.

struct NestedHeadConfig {
  std::size_t hidden = 64;
  std::size_t label_dim = 16;
  std::size_t max_depth = kDefaultMaxDepth;

  bool operator==(const NestedHeadConfig&) const = default;
};

void to_json(nlohmann::json& j, const NestedHeadConfig& c);
void from_json(const nlohmann::json& j, NestedHeadConfig& c);

/// Output vocabulary: id 0 = `<eow>`, `B-X` = 1 + 2i, `I-X` = 2 + 2i. Input embeddings add
/// `<bos>` as the last row. For each token the state starts at tanh(W_init x + b_init) and a
/// gated recurrent cell consumes [embed(previous label); x] at every step, x being the
/// token's encoder vector.
struct NestedHead {
  std::vector<std::string> etypes;
  std::size_t max_depth = kDefaultMaxDepth;

  Matrix w_init, b_init;
  Matrix label_embedding;  // (V + 1) x label_dim
  Matrix wz, uz, bz;
  Matrix wr, ur, br;
  Matrix wn, un, bn;
  Matrix w_out, b_out;     // V x hidden, V x 1

  std::size_t vocab_size() const { return 1 + 2 * etypes.size(); }
  std::size_t bos() const { return vocab_size(); }
  std::size_t hidden() const { return static_cast<std::size_t>(w_init.rows()); }
  std::size_t label_dim() const { return static_cast<std::size_t>(label_embedding.cols()); }

  /// Vocabulary id of a label; throws LookupError for etypes outside the inventory.
  int label_id(const Label& label) const;
  Label label(int id) const;

  template <typename Self, typename F>
  static void visit(Self& s, F&& f) {
    f("w_init", s.w_init);
    f("b_init", s.b_init);
    f("label_embedding", s.label_embedding);
    f("wz", s.wz);
    f("uz", s.uz);
    f("bz", s.bz);
    f("wr", s.wr);
    f("ur", s.ur);
    f("br", s.br);
    f("wn", s.wn);
    f("un", s.un);
    f("bn", s.bn);
    f("w_out", s.w_out);
    f("b_out", s.b_out);
  }
};

NestedHead init_nested_head(std::vector<std::string> etypes, std::size_t width, const NestedHeadConfig& config,
                            std::mt19937_64& rng, Real init_scale = 0.1);

/// Greedy decoding, token by token, until `<eow>` or `max_depth` labels.
LinearizedLabels nested_decode(const NestedHead& head, const EncoderOutput& enc);

/// Decode followed by delinearization, duplicates removed.
SpanList nested_predict(const NestedHead& head, const EncoderOutput& enc);

struct NestedLoss {
  Real loss = 0;
  NestedHead grads;
  Matrix d_encoder;
};

/// Teacher-forced cross-entropy averaged over all emitted symbols including each `<eow>`.
NestedLoss nested_loss(const NestedHead& head, const EncoderOutput& enc, const LinearizedLabels& gold);

}  // namespace nerforge
