#include "nerforge/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "nerforge/binary_io.hpp"
#include "nerforge/corpus_io.hpp"
#include "nerforge/types.hpp"

namespace nerforge {

void to_json(nlohmann::json& j, const EncoderConfig& c) {
  j = {{"width", c.width},
       {"buckets", c.buckets},
       {"max_relative", c.max_relative},
       {"max_len", c.max_len},
       {"init_scale", c.init_scale}};
}

void from_json(const nlohmann::json& j, EncoderConfig& c) {
  c.width = j.value("width", c.width);
  c.buckets = j.value("buckets", c.buckets);
  c.max_relative = j.value("max_relative", c.max_relative);
  c.max_len = j.value("max_len", c.max_len);
  c.init_scale = j.value("init_scale", c.init_scale);
}

EncoderParams init_encoder(const EncoderConfig& config, std::mt19937_64& rng) {
  if (config.width == 0 || config.buckets == 0) throw ConfigError("encoder width and buckets must be positive");
  const auto d = static_cast<Eigen::Index>(config.width);
  EncoderParams p;
  p.table.resize(static_cast<Eigen::Index>(config.buckets), d);
  p.wq.resize(d, d);
  p.wk.resize(d, d);
  p.wv.resize(d, d);
  p.wo.resize(d, d);
  p.rel_bias.resize(static_cast<Eigen::Index>(2 * config.max_relative + 1), 1);
  p.rel_value.resize(static_cast<Eigen::Index>(2 * config.max_relative + 1), d);
  fill_uniform(p, rng, config.init_scale);
  return p;
}

namespace {

std::vector<std::string> codepoints(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 1;
    len = std::min(len, s.size() - i);
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

char shape_class(const std::string& cp) {
  if (cp.size() > 1) return 'u';
  char c = cp[0];
  if (c >= 'A' && c <= 'Z') return 'X';
  if (c >= 'a' && c <= 'z') return 'x';
  if (c >= '0' && c <= '9') return 'd';
  return c;
}

}  // namespace

std::vector<std::size_t> token_features(const std::string& token, std::size_t buckets) {
  std::vector<std::string> names;
  std::string lower = token;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : static_cast<char>(c); });
  names.push_back("w:" + token);
  names.push_back("l:" + lower);

  const auto cps = codepoints(lower);
  std::string shape;
  for (const auto& cp : codepoints(token)) {
    char c = shape_class(cp);
    if (shape.empty() || shape.back() != c) shape.push_back(c);
  }
  names.push_back("s:" + shape);

  for (std::size_t n = 1; n <= 3 && n <= cps.size(); ++n) {
    std::string pre, suf;
    for (std::size_t i = 0; i < n; ++i) {
      pre += cps[i];
      suf += cps[cps.size() - n + i];
    }
    names.push_back("p" + std::to_string(n) + ":" + pre);
    names.push_back("s" + std::to_string(n) + ":" + suf);
  }

  std::vector<std::string> padded{"<"};
  padded.insert(padded.end(), cps.begin(), cps.end());
  padded.emplace_back(">");
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) names.push_back("c:" + padded[i] + padded[i + 1] + padded[i + 2]);

  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(static_cast<std::size_t>(fnv1a(n) % buckets));
  return out;
}

EncoderTrace embed_traced(const EncoderParams& params, const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw ShapeError("cannot embed an empty sentence");
  const auto n = static_cast<Eigen::Index>(tokens.size());
  const auto d = static_cast<Eigen::Index>(params.width());
  const auto buckets = static_cast<std::size_t>(params.table.rows());
  const auto r = static_cast<long>(params.max_relative());

  EncoderTrace tr;
  tr.embedded.setZero(n, d);
  tr.features.reserve(tokens.size());
  for (Eigen::Index t = 0; t < n; ++t) {
    auto feats = token_features(tokens[static_cast<std::size_t>(t)], buckets);
    for (auto f : feats) tr.embedded.row(t) += params.table.row(static_cast<Eigen::Index>(f));
    tr.embedded.row(t) /= static_cast<Real>(feats.size());
    tr.features.push_back(std::move(feats));
  }

  tr.q = tr.embedded * params.wq;
  tr.k = tr.embedded * params.wk;
  tr.v = tr.embedded * params.wv;
  Matrix scores = tr.q * tr.k.transpose() / std::sqrt(static_cast<Real>(d));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      scores(i, j) += params.rel_bias(std::clamp<long>(static_cast<long>(j - i), -r, r) + r, 0);
  tr.attention = softmax_rows(scores);
  tr.context = tr.attention * tr.v;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      tr.context.row(i) += tr.attention(i, j) * params.rel_value.row(std::clamp<long>(static_cast<long>(j - i), -r, r) + r);
  tr.output = tr.embedded + tr.context * params.wo;
  return tr;
}

EncoderOutput embed(const EncoderParams& params, const std::vector<std::string>& tokens, std::size_t max_len) {
  if (max_len && tokens.size() > max_len)
    throw ShapeError("sentence of " + std::to_string(tokens.size()) + " tokens exceeds max_len " +
                     std::to_string(max_len));
  return embed_traced(params, tokens).output;
}

void embed_backward(const EncoderParams& params, const EncoderTrace& tr, const Matrix& upstream,
                    EncoderParams& grads) {
  if (upstream.rows() != tr.output.rows() || upstream.cols() != tr.output.cols())
    throw ShapeError("upstream gradient shape does not match encoder output");
  if (params.frozen) return;
  const auto n = tr.output.rows();
  const auto d = tr.output.cols();
  const auto r = static_cast<long>(params.max_relative());
  const Real inv_sqrt_d = 1 / std::sqrt(static_cast<Real>(d));

  grads.wo.noalias() += tr.context.transpose() * upstream;
  const Matrix d_context = upstream * params.wo.transpose();
  Matrix d_attention = d_context * tr.v.transpose();
  const Matrix d_v = tr.attention.transpose() * d_context;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto rel = std::clamp<long>(static_cast<long>(j - i), -r, r) + r;
      d_attention(i, j) += d_context.row(i).dot(params.rel_value.row(rel));
      grads.rel_value.row(rel) += tr.attention(i, j) * d_context.row(i);
    }

  Matrix d_scores = tr.attention.array() *
                    (d_attention.colwise() - (d_attention.array() * tr.attention.array()).rowwise().sum().matrix()).array();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      grads.rel_bias(std::clamp<long>(static_cast<long>(j - i), -r, r) + r, 0) += d_scores(i, j);
  d_scores *= inv_sqrt_d;
  const Matrix d_q = d_scores * tr.k;
  const Matrix d_k = d_scores.transpose() * tr.q;

  grads.wq.noalias() += tr.embedded.transpose() * d_q;
  grads.wk.noalias() += tr.embedded.transpose() * d_k;
  grads.wv.noalias() += tr.embedded.transpose() * d_v;

  Matrix d_embedded = upstream;
  d_embedded.noalias() += d_q * params.wq.transpose();
  d_embedded.noalias() += d_k * params.wk.transpose();
  d_embedded.noalias() += d_v * params.wv.transpose();

  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& feats = tr.features[static_cast<std::size_t>(t)];
    const Real scale = 1 / static_cast<Real>(feats.size());
    for (auto f : feats) grads.table.row(static_cast<Eigen::Index>(f)) += scale * d_embedded.row(t);
  }
}

EncoderParams embed_backward(const EncoderParams& params, const std::vector<std::string>& tokens,
                             const Matrix& upstream) {
  EncoderParams grads = zeros_like(params);
  if (params.frozen) {
    if (upstream.rows() != static_cast<Eigen::Index>(tokens.size()) ||
        upstream.cols() != static_cast<Eigen::Index>(params.width()))
      throw ShapeError("upstream gradient shape does not match encoder output");
    return grads;
  }
  embed_backward(params, embed_traced(params, tokens), upstream, grads);
  return grads;
}

void PrecomputedEmbeddings::add(const std::string& doc_id, std::size_t sentence, Matrix vectors) {
  if (width_ == 0) width_ = static_cast<std::size_t>(vectors.cols());
  if (static_cast<std::size_t>(vectors.cols()) != width_)
    throw ShapeError("embedding width " + std::to_string(vectors.cols()) + " differs from " + std::to_string(width_));
  blocks_[{doc_id, sentence}] = std::move(vectors);
}

const Matrix& PrecomputedEmbeddings::lookup(const std::string& doc_id, std::size_t sentence,
                                            std::size_t n_tokens) const {
  auto it = blocks_.find({doc_id, sentence});
  if (it == blocks_.end())
    throw LookupError("no precomputed embeddings for document '" + doc_id + "' sentence " + std::to_string(sentence));
  if (static_cast<std::size_t>(it->second.rows()) != n_tokens)
    throw ShapeError("precomputed embeddings for document '" + doc_id + "' sentence " + std::to_string(sentence) +
                     " have " + std::to_string(it->second.rows()) + " rows, sentence has " +
                     std::to_string(n_tokens) + " tokens");
  return it->second;
}

namespace {
constexpr std::string_view kEmbMagic{"NFEMB\0\0\0", 8};
}

void PrecomputedEmbeddings::save(const std::string& path) const {
  binary::Writer w;
  w.bytes(kEmbMagic);
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(width_));
  w.u64(blocks_.size());
  for (const auto& [key, m] : blocks_) {
    w.str(key.first);
    w.u64(key.second);
    w.u64(static_cast<std::uint64_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
  }
  write_file(path, w.data());
}

PrecomputedEmbeddings PrecomputedEmbeddings::load(const std::string& path) {
  const std::string data = read_file(path);
  binary::Reader r(data);
  if (r.bytes(kEmbMagic.size()) != kEmbMagic) throw ParseError("'" + path + "' is not an embedding file");
  if (auto version = r.u32(); version != 1)
    throw ParseError("unsupported embedding file version " + std::to_string(version));
  PrecomputedEmbeddings out(r.u32());
  const auto count = r.u64();
  const auto cols = static_cast<Eigen::Index>(out.width_);
  for (std::uint64_t b = 0; b < count; ++b) {
    std::string id = r.str();
    const auto sentence = static_cast<std::size_t>(r.u64());
    const auto rows = static_cast<Eigen::Index>(r.u64());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.f64();
    out.blocks_[{std::move(id), sentence}] = std::move(m);
  }
  if (!r.done()) throw ParseError("trailing bytes in embedding file '" + path + "'");
  return out;
}

}  // namespace nerforge
