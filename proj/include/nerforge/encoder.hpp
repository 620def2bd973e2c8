#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nerforge/math.hpp"

namespace nerforge {

/// Contextual token vectors, one row per token.
using EncoderOutput = Matrix;

struct EncoderConfig {
  std::size_t width = 64;
  std::size_t buckets = 4096;       // hashed feature table rows
  std::size_t max_relative = 4;     // relative-position bias clipped to [-R, R]
  std::size_t max_len = 512;
  Real init_scale = 0.1;

  bool operator==(const EncoderConfig&) const = default;
};

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);

/// Word-level stand-in for a pretrained encoder: hashed character n-gram embeddings
/// followed by one single-head self-attention layer with a residual connection. Attention
/// carries relative-position terms (clipped to [-R, R]) in both scores and values:
///
///   E      = mean of feature rows of `table`
///   S_ij   = (E Wq)_i . (E Wk)_j / sqrt(d) + rel_bias[clip(j - i)]
///   A      = softmax_rows(S)
///   C_i    = sum_j A_ij ((E Wv)_j + rel_value[clip(j - i)])
///   out    = E + C Wo
struct EncoderParams {
  Matrix table;          // buckets x d
  Matrix wq, wk, wv, wo; // d x d
  Matrix rel_bias;       // (2R + 1) x 1
  Matrix rel_value;      // (2R + 1) x d
  bool frozen = false;

  std::size_t width() const { return static_cast<std::size_t>(wq.rows()); }
  std::size_t max_relative() const { return static_cast<std::size_t>(rel_bias.rows() - 1) / 2; }

  template <typename Self, typename F>
  static void visit(Self& s, F&& f) {
    f("table", s.table);
    f("wq", s.wq);
    f("wk", s.wk);
    f("wv", s.wv);
    f("wo", s.wo);
    f("rel_bias", s.rel_bias);
    f("rel_value", s.rel_value);
  }
};

/// Allocates and initializes uniformly in [-init_scale, init_scale].
EncoderParams init_encoder(const EncoderConfig& config, std::mt19937_64& rng);

/// Hashed feature rows for one token: word, lowercase, shape, affixes, character trigrams.
std::vector<std::size_t> token_features(const std::string& token, std::size_t buckets);

/// Forward intermediates kept for the backward pass.
struct EncoderTrace {
  std::vector<std::vector<std::size_t>> features;
  Matrix embedded;   // E
  Matrix q, k, v;
  Matrix attention;  // A
  Matrix context;    // C
  EncoderOutput output;
};

EncoderTrace embed_traced(const EncoderParams& params, const std::vector<std::string>& tokens);

/// Deterministic in params and tokens. Throws ShapeError for empty input or more than
/// `max_len` tokens when `max_len` is non-zero.
EncoderOutput embed(const EncoderParams& params, const std::vector<std::string>& tokens,
                    std::size_t max_len = 0);

/// Adds d(loss)/d(params) given d(loss)/d(output) into `grads`; no-op when frozen.
void embed_backward(const EncoderParams& params, const EncoderTrace& trace, const Matrix& upstream,
                    EncoderParams& grads);

/// Exact parameter gradients; all zero when `params.frozen`.
EncoderParams embed_backward(const EncoderParams& params, const std::vector<std::string>& tokens,
                             const Matrix& upstream);

/// Externally computed sentence matrices keyed by (document id, sentence index).
///
/// File layout (little-endian), version 1:
///   magic "NFEMB\0\0\0" | u32 version | u32 width | u64 count
///   count x { u32 id_len | id bytes | u64 sentence | u64 rows | rows*width f64, row-major }
class PrecomputedEmbeddings {
 public:
  using Key = std::pair<std::string, std::size_t>;

  explicit PrecomputedEmbeddings(std::size_t width = 0) : width_(width) {}

  std::size_t width() const { return width_; }
  std::size_t size() const { return blocks_.size(); }

  /// Throws ShapeError when the column count differs from `width()`.
  void add(const std::string& doc_id, std::size_t sentence, Matrix vectors);

  /// Throws LookupError for unknown keys and ShapeError when `n_tokens` differs from the
  /// stored row count.
  const Matrix& lookup(const std::string& doc_id, std::size_t sentence, std::size_t n_tokens) const;

  void save(const std::string& path) const;
  static PrecomputedEmbeddings load(const std::string& path);

 private:
  std::size_t width_;
  std::map<Key, Matrix> blocks_;
};

}  // namespace nerforge
