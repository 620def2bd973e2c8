#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nerforge/model.hpp"

namespace nerforge {

inline constexpr std::size_t kWindowOverlap = 32;

/// Window start offsets covering `n` tokens with windows of `max_len` tokens. Consecutive
/// windows share `overlap` tokens (reduced to max_len / 2 for short windows); the last window
/// ends at `n`.
std::vector<std::size_t> window_starts(std::size_t n, std::size_t max_len, std::size_t overlap = kWindowOverlap);

struct WindowPrediction {
  std::size_t start = 0;  // first token of the window
  std::size_t length = 0;
  SpanList spans;         // window-relative
};

/// Merges window predictions over a sentence of `n` tokens: candidates are accepted greedily
/// by distance from the nearest window edge (sentence ends do not count as edges), skipping
/// duplicates and spans that conflict with an accepted one (overlap for flat models,
/// crossing for nested). Returns canonical order.
SpanList merge_windows(ModelKind kind, std::size_t n, const std::vector<WindowPrediction>& windows);

/// Predicts spans for a sentence of any length. Sentences above the encoder's max_len are
/// split into overlapping windows and merged with merge_windows.
SpanList predict_tokens(const ModelBundle& model, const std::vector<std::string>& tokens,
                        const std::string& tagset = "");

/// Resolves the tagset a request runs under: "" picks the model default for flat models.
/// Throws RoutingError for unknown tagsets or any tagset on a nested model.
std::string resolve_tagset(const ModelBundle& model, const std::string& requested);

/// Fills flat_spans (flat models) or nested_spans (nested models) of every sentence.
Document annotate(const ModelBundle& model, Document doc, const std::string& tagset = "");

/// Spans a model writes into, by kind.
const SpanList& predicted_spans(const ModelBundle& model, const Sentence& sentence);

/// {"model", "tagset", "sentences": [{"tokens", "spans": [{"start","end","type","text"}]}]}
nlohmann::json render_json(const ModelBundle& model, const std::string& tagset, const Document& doc);
/// Flat models: token<TAB>BIO lines; nested models: token<TAB>stacked labels.
std::string render_conll(const ModelBundle& model, const Document& doc);
/// One `first,last<TAB>type<TAB>text` line per span, 1-based token ordinals continuous over
/// the document, sentences in order and spans in canonical order.
std::string render_vertical(const ModelBundle& model, const Document& doc);

/// Space-joined tokens covered by the span.
std::string span_text(const Sentence& sentence, const EntitySpan& span);

}  // namespace nerforge
