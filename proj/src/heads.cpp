#include "nerforge/heads.hpp"

#include <algorithm>
#include <cmath>

#include "nerforge/types.hpp"

namespace nerforge {

// ---------------------------------------------------------------------------
// Flat heads

std::size_t FlatHeads::index_of(std::string_view tagset) const {
  for (std::size_t i = 0; i < heads.size(); ++i)
    if (heads[i].tagset.name() == tagset) return i;
  throw RoutingError("no classification head for tagset '" + std::string(tagset) + "'");
}

const FlatHead& FlatHeads::at(std::string_view tagset) const { return heads[index_of(tagset)]; }
FlatHead& FlatHeads::at(std::string_view tagset) { return heads[index_of(tagset)]; }

FlatHeads init_flat_heads(const TagsetRegistry& registry, std::size_t width, std::mt19937_64& rng,
                          Real init_scale) {
  if (registry.empty()) throw ConfigError("a flat model needs at least one tagset");
  FlatHeads out;
  for (const auto& t : registry.tagsets()) {
    const auto labels = static_cast<Eigen::Index>(t.num_labels());
    out.heads.push_back({t, Matrix(static_cast<Eigen::Index>(width), labels), Matrix(labels, 1)});
  }
  fill_uniform(out, rng, init_scale);
  return out;
}

Matrix flat_forward(const FlatHeads& heads, const EncoderOutput& enc, std::string_view tagset) {
  const auto& head = heads.at(tagset);
  if (enc.cols() != head.weight.rows())
    throw ShapeError("encoder width " + std::to_string(enc.cols()) + " does not match head width " +
                     std::to_string(head.weight.rows()));
  Matrix logits = enc * head.weight;
  logits.rowwise() += head.bias.col(0).transpose();
  return logits;
}

std::vector<int> flat_argmax(const Matrix& logits) {
  std::vector<int> ids(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index t = 0; t < logits.rows(); ++t)
    ids[static_cast<std::size_t>(t)] = static_cast<int>(argmax(logits.row(t)));
  return ids;
}

SpanList flat_predict(const FlatHeads& heads, const EncoderOutput& enc, std::string_view tagset) {
  const auto ids = flat_argmax(flat_forward(heads, enc, tagset));
  return bio_to_spans(heads.at(tagset).tagset.decode(ids));
}

FlatLoss flat_loss(const FlatHeads& heads, const EncoderOutput& enc, std::string_view tagset,
                   const std::vector<int>& gold) {
  const auto index = heads.index_of(tagset);
  const auto& head = heads.heads[index];
  if (gold.size() != static_cast<std::size_t>(enc.rows()))
    throw ShapeError("gold label count " + std::to_string(gold.size()) + " differs from token count " +
                     std::to_string(enc.rows()));
  if (!validate_labels(head.tagset, gold))
    throw LookupError("gold label id outside tagset '" + head.tagset.name() + "'");

  const Matrix logits = flat_forward(heads, enc, tagset);
  Matrix d_logits = softmax_rows(logits);
  const auto n = static_cast<Real>(enc.rows());
  FlatLoss out{0, zeros_like(heads), Matrix()};
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const auto y = gold[static_cast<std::size_t>(t)];
    out.loss += log_sum_exp(logits.row(t)) - logits(t, y);
    d_logits(t, y) -= 1;
  }
  out.loss /= n;
  d_logits /= n;
  auto& g = out.grads.heads[index];
  g.weight.noalias() = enc.transpose() * d_logits;
  g.bias = d_logits.colwise().sum().transpose();
  out.d_encoder = d_logits * head.weight.transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Nested head

void to_json(nlohmann::json& j, const NestedHeadConfig& c) {
  j = {{"hidden", c.hidden}, {"label_dim", c.label_dim}, {"max_depth", c.max_depth}};
}

void from_json(const nlohmann::json& j, NestedHeadConfig& c) {
  c.hidden = j.value("hidden", c.hidden);
  c.label_dim = j.value("label_dim", c.label_dim);
  c.max_depth = j.value("max_depth", c.max_depth);
}

int NestedHead::label_id(const Label& label) const {
  auto it = std::find(etypes.begin(), etypes.end(), label.etype);
  if (it == etypes.end()) throw LookupError("label '" + label.str() + "' outside the nested label vocabulary");
  return 1 + 2 * static_cast<int>(it - etypes.begin()) + (label.prefix == Prefix::Inside ? 1 : 0);
}

Label NestedHead::label(int id) const {
  if (id <= 0 || static_cast<std::size_t>(id) >= vocab_size())
    throw LookupError("nested label id " + std::to_string(id) + " is not a scheme label");
  const auto e = static_cast<std::size_t>(id - 1) / 2;
  return {(id - 1) % 2 == 0 ? Prefix::Begin : Prefix::Inside, etypes[e]};
}

NestedHead init_nested_head(std::vector<std::string> etypes, std::size_t width, const NestedHeadConfig& config,
                            std::mt19937_64& rng, Real init_scale) {
  if (etypes.empty()) throw ConfigError("a nested model needs at least one entity type");
  for (std::size_t i = 0; i < etypes.size(); ++i) {
    check_span({0, 1, etypes[i]}, 1);
    for (std::size_t j = 0; j < i; ++j)
      if (etypes[i] == etypes[j]) throw ConfigError("duplicate nested entity type '" + etypes[i] + "'");
  }
  NestedHead h;
  h.etypes = std::move(etypes);
  h.max_depth = config.max_depth;
  const auto d = static_cast<Eigen::Index>(width);
  const auto hid = static_cast<Eigen::Index>(config.hidden);
  const auto m = static_cast<Eigen::Index>(config.label_dim);
  const auto v = static_cast<Eigen::Index>(h.vocab_size());
  h.w_init.resize(hid, d);
  h.b_init.resize(hid, 1);
  h.label_embedding.resize(v + 1, m);
  for (Matrix* w : {&h.wz, &h.wr, &h.wn}) w->resize(hid, m + d);
  for (Matrix* u : {&h.uz, &h.ur, &h.un}) u->resize(hid, hid);
  for (Matrix* b : {&h.bz, &h.br, &h.bn}) b->resize(hid, 1);
  h.w_out.resize(v, hid);
  h.b_out.resize(v, 1);
  fill_uniform(h, rng, init_scale);
  return h;
}

namespace {

struct GruStep {
  Vector input;  // [label embedding; x]
  Vector h_prev, z, r, c, h;
};

Vector initial_state(const NestedHead& head, const Vector& x) {
  return (head.w_init * x + head.b_init.col(0)).array().tanh().matrix();
}

GruStep gru_step(const NestedHead& head, const Vector& h_prev, std::size_t prev_label, const Vector& x) {
  GruStep s;
  const auto m = static_cast<Eigen::Index>(head.label_dim());
  s.input.resize(m + x.size());
  s.input.head(m) = head.label_embedding.row(static_cast<Eigen::Index>(prev_label)).transpose();
  s.input.tail(x.size()) = x;
  s.h_prev = h_prev;
  s.z = sigmoid(head.wz * s.input + head.uz * h_prev + head.bz.col(0));
  s.r = sigmoid(head.wr * s.input + head.ur * h_prev + head.br.col(0));
  s.c = (head.wn * s.input + head.un * s.r.cwiseProduct(h_prev) + head.bn.col(0)).array().tanh().matrix();
  s.h = (Vector::Ones(s.z.size()) - s.z).cwiseProduct(s.c) + s.z.cwiseProduct(h_prev);
  return s;
}

Vector output_logits(const NestedHead& head, const Vector& h) { return head.w_out * h + head.b_out.col(0); }

void check_width(const NestedHead& head, const EncoderOutput& enc) {
  if (enc.cols() != head.w_init.cols())
    throw ShapeError("encoder width " + std::to_string(enc.cols()) + " does not match decoder width " +
                     std::to_string(head.w_init.cols()));
}

}  // namespace

LinearizedLabels nested_decode(const NestedHead& head, const EncoderOutput& enc) {
  check_width(head, enc);
  LinearizedLabels out;
  out.per_token.resize(static_cast<std::size_t>(enc.rows()));
  for (Eigen::Index t = 0; t < enc.rows(); ++t) {
    const Vector x = enc.row(t).transpose();
    Vector h = initial_state(head, x);
    std::size_t prev = head.bos();
    auto& stack = out.per_token[static_cast<std::size_t>(t)];
    while (stack.size() < head.max_depth) {
      h = gru_step(head, h, prev, x).h;
      const auto best = static_cast<std::size_t>(argmax(output_logits(head, h)));
      if (best == 0) break;
      stack.push_back(head.label(static_cast<int>(best)));
      prev = best;
    }
  }
  return out;
}

SpanList nested_predict(const NestedHead& head, const EncoderOutput& enc) {
  SpanList spans = delinearize(nested_decode(head, enc));
  canonicalize(spans);
  return spans;
}

NestedLoss nested_loss(const NestedHead& head, const EncoderOutput& enc, const LinearizedLabels& gold) {
  check_width(head, enc);
  if (gold.size() != static_cast<std::size_t>(enc.rows()))
    throw ShapeError("gold covers " + std::to_string(gold.size()) + " tokens, encoder output has " +
                     std::to_string(enc.rows()));

  std::vector<std::vector<std::size_t>> targets;
  std::size_t total = 0;
  for (const auto& stack : gold.per_token) {
    auto& ids = targets.emplace_back();
    for (const auto& l : stack) ids.push_back(static_cast<std::size_t>(head.label_id(l)));
    ids.push_back(0);
    total += ids.size();
  }
  const Real scale = 1 / static_cast<Real>(total);
  const auto m = static_cast<Eigen::Index>(head.label_dim());

  NestedLoss out{0, zeros_like(head), Matrix::Zero(enc.rows(), enc.cols())};
  auto& g = out.grads;
  for (Eigen::Index t = 0; t < enc.rows(); ++t) {
    const Vector x = enc.row(t).transpose();
    const auto& ys = targets[static_cast<std::size_t>(t)];
    const Vector h0 = initial_state(head, x);

    std::vector<GruStep> steps;
    std::vector<Vector> probs;
    std::vector<std::size_t> inputs;
    Vector h = h0;
    std::size_t prev = head.bos();
    for (auto y : ys) {
      steps.push_back(gru_step(head, h, prev, x));
      inputs.push_back(prev);
      h = steps.back().h;
      const Vector logits = output_logits(head, h);
      out.loss += scale * (log_sum_exp(logits) - logits(static_cast<Eigen::Index>(y)));
      probs.push_back(softmax(logits));
      prev = y;
    }

    Vector dh = Vector::Zero(h0.size());
    Vector dx = Vector::Zero(x.size());
    for (std::size_t k = ys.size(); k-- > 0;) {
      const auto& s = steps[k];
      Vector d_logits = scale * probs[k];
      d_logits(static_cast<Eigen::Index>(ys[k])) -= scale;
      g.w_out.noalias() += d_logits * s.h.transpose();
      g.b_out.col(0) += d_logits;
      dh.noalias() += head.w_out.transpose() * d_logits;

      const Vector ones = Vector::Ones(s.z.size());
      const Vector dz = dh.cwiseProduct(s.h_prev - s.c);
      const Vector dc = dh.cwiseProduct(ones - s.z);
      Vector dh_prev = dh.cwiseProduct(s.z);

      const Vector dc_pre = dc.cwiseProduct((ones - s.c.cwiseProduct(s.c)));
      const Vector rh = s.r.cwiseProduct(s.h_prev);
      g.wn.noalias() += dc_pre * s.input.transpose();
      g.un.noalias() += dc_pre * rh.transpose();
      g.bn.col(0) += dc_pre;
      Vector d_input = head.wn.transpose() * dc_pre;
      const Vector d_rh = head.un.transpose() * dc_pre;
      const Vector dr = d_rh.cwiseProduct(s.h_prev);
      dh_prev += d_rh.cwiseProduct(s.r);

      const Vector dz_pre = dz.cwiseProduct(s.z.cwiseProduct(ones - s.z));
      const Vector dr_pre = dr.cwiseProduct(s.r.cwiseProduct(ones - s.r));
      g.wz.noalias() += dz_pre * s.input.transpose();
      g.uz.noalias() += dz_pre * s.h_prev.transpose();
      g.bz.col(0) += dz_pre;
      g.wr.noalias() += dr_pre * s.input.transpose();
      g.ur.noalias() += dr_pre * s.h_prev.transpose();
      g.br.col(0) += dr_pre;
      d_input.noalias() += head.wz.transpose() * dz_pre;
      d_input.noalias() += head.wr.transpose() * dr_pre;
      dh_prev.noalias() += head.uz.transpose() * dz_pre;
      dh_prev.noalias() += head.ur.transpose() * dr_pre;

      g.label_embedding.row(static_cast<Eigen::Index>(inputs[k])) += d_input.head(m).transpose();
      dx += d_input.tail(x.size());
      dh = std::move(dh_prev);
    }
    const Vector d_init = dh.cwiseProduct((Vector::Ones(h0.size()) - h0.cwiseProduct(h0)));
    g.w_init.noalias() += d_init * x.transpose();
    g.b_init.col(0) += d_init;
    dx.noalias() += head.w_init.transpose() * d_init;
    out.d_encoder.row(t) = dx.transpose();
  }
  return out;
}

}  // namespace nerforge
