#include "nerforge/annotate.hpp"

#include <algorithm>

#include "nerforge/corpus_io.hpp"

namespace nerforge {

std::vector<std::size_t> window_starts(std::size_t n, std::size_t max_len, std::size_t overlap) {
  if (max_len == 0) throw ConfigError("window length must be positive");
  if (n <= max_len) return {0};
  overlap = std::min(overlap, max_len / 2);
  const std::size_t stride = max_len - overlap;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + max_len < n; s += stride) starts.push_back(s);
  starts.push_back(n - max_len);
  return starts;
}

namespace {

struct Candidate {
  EntitySpan span;
  std::size_t margin;
};

bool conflicts(ModelKind kind, const EntitySpan& a, const EntitySpan& b) {
  if (a == b) return true;
  return kind == ModelKind::Flat ? a.overlaps(b) : a.crosses(b);
}

}  // namespace

SpanList merge_windows(ModelKind kind, std::size_t n, const std::vector<WindowPrediction>& windows) {
  std::vector<Candidate> candidates;
  for (const auto& w : windows) {
    const std::size_t end = w.start + w.length;
    for (auto span : w.spans) {
      span.start += w.start;
      span.end += w.start;
      const std::size_t left = w.start == 0 ? n : span.start - w.start;
      const std::size_t right = end >= n ? n : end - span.end;
      candidates.push_back({span, std::min(left, right)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.margin != b.margin) return a.margin > b.margin;
    return CanonicalOrder{}(a.span, b.span);
  });
  SpanList accepted;
  for (const auto& c : candidates) {
    const bool clash =
        std::any_of(accepted.begin(), accepted.end(), [&](const EntitySpan& s) { return conflicts(kind, s, c.span); });
    if (!clash) accepted.push_back(c.span);
  }
  canonicalize(accepted);
  return accepted;
}

SpanList predict_tokens(const ModelBundle& model, const std::vector<std::string>& tokens, const std::string& tagset) {
  const std::size_t max_len = model.encoder_config.max_len;
  if (tokens.empty()) return {};
  if (max_len == 0 || tokens.size() <= max_len) return predict_sentence(model, tokens, tagset);

  std::vector<WindowPrediction> windows;
  for (const std::size_t start : window_starts(tokens.size(), max_len)) {
    const auto first = tokens.begin() + static_cast<std::ptrdiff_t>(start);
    windows.push_back({start, max_len, predict_sentence(model, {first, first + static_cast<std::ptrdiff_t>(max_len)}, tagset)});
  }
  return merge_windows(model.kind, tokens.size(), windows);
}

std::string resolve_tagset(const ModelBundle& model, const std::string& requested) {
  if (model.kind == ModelKind::Nested) {
    if (!requested.empty()) throw RoutingError("nested model '" + model.name + "' takes no tagset, got '" + requested + "'");
    return "";
  }
  if (requested.empty()) return model.default_tagset();
  if (!model.registry.contains(requested))
    throw RoutingError("model '" + model.name + "' has no tagset '" + requested + "'");
  return requested;
}

Document annotate(const ModelBundle& model, Document doc, const std::string& tagset) {
  const std::string resolved = resolve_tagset(model, tagset);
  for (auto& s : doc.sentences) {
    auto spans = predict_tokens(model, s.words(), resolved);
    if (model.kind == ModelKind::Flat) s.flat_spans = std::move(spans);
    else s.nested_spans = std::move(spans);
  }
  return doc;
}

const SpanList& predicted_spans(const ModelBundle& model, const Sentence& sentence) {
  return model.kind == ModelKind::Flat ? sentence.flat_spans : sentence.nested_spans;
}

std::string span_text(const Sentence& sentence, const EntitySpan& span) {
  std::string out;
  for (std::size_t i = span.start; i < span.end; ++i) {
    if (i > span.start) out += ' ';
    out += sentence.tokens[i].text;
  }
  return out;
}

nlohmann::json render_json(const ModelBundle& model, const std::string& tagset, const Document& doc) {
  nlohmann::json sentences = nlohmann::json::array();
  for (const auto& s : doc.sentences) {
    nlohmann::json spans = nlohmann::json::array();
    for (const auto& span : predicted_spans(model, s))
      spans.push_back({{"start", span.start}, {"end", span.end}, {"type", span.etype}, {"text", span_text(s, span)}});
    sentences.push_back({{"tokens", s.words()}, {"spans", std::move(spans)}});
  }
  return {{"model", model.name}, {"tagset", tagset}, {"sentences", std::move(sentences)}};
}

std::string render_conll(const ModelBundle& model, const Document& doc) {
  return model.kind == ModelKind::Flat ? write_flat_conll(doc) : write_nested(doc);
}

std::string render_vertical(const ModelBundle& model, const Document& doc) {
  std::string out;
  std::size_t offset = 0;
  for (const auto& s : doc.sentences) {
    for (const auto& span : predicted_spans(model, s)) {
      out += std::to_string(offset + span.start + 1) + ',' + std::to_string(offset + span.end) + '\t' + span.etype +
             '\t' + span_text(s, span) + '\n';
    }
    offset += s.size();
  }
  return out;
}

}  // namespace nerforge
