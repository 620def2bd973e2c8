#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nerforge/types.hpp"

namespace nerforge {

inline constexpr std::size_t kDefaultMaxDepth = 16;
inline constexpr std::string_view kOutside = "O";
inline constexpr std::string_view kEndOfWord = "<eow>";

enum class Prefix { Begin, Inside };

/// One scheme label `B-X` or `I-X`.
struct Label {
  Prefix prefix = Prefix::Begin;
  std::string etype;

  std::string str() const;
  /// Parses `B-X` / `I-X`; returns nullopt for anything else (including `O`).
  static std::optional<Label> parse(std::string_view text);

  bool operator==(const Label&) const = default;
};

/// Per-token label stacks, outer to inner; the `<eow>` terminator is implicit.
struct LinearizedLabels {
  std::vector<std::vector<Label>> per_token;

  std::size_t size() const { return per_token.size(); }
  bool operator==(const LinearizedLabels&) const = default;
};

// Flat BIO codec.

/// Encodes disjoint spans as BIO strings. Throws SpanError naming the first overlapping pair.
std::vector<std::string> spans_to_bio(std::size_t n_tokens, const SpanList& spans);

/// Total decoder. `I-X` after `O`, at sentence start, or after a different etype opens a span.
/// Labels that are neither `O` nor `B-`/`I-` are treated as `O`.
SpanList bio_to_spans(const std::vector<std::string>& labels);

// Nested linearization codec.

/// Per token: one label per covering span, canonical order. Throws SpanError on crossing
/// spans, identical duplicates, out-of-range spans, or depth above `max_depth`.
LinearizedLabels linearize(std::size_t n_tokens, const SpanList& spans,
                           std::size_t max_depth = kDefaultMaxDepth);

/// Total inverse of `linearize` with per-slot repair; the result is always non-crossing
/// and returned in canonical order (duplicates produced by repair are kept).
SpanList delinearize(const LinearizedLabels& labels);

/// True iff no two spans cross.
bool non_crossing(const SpanList& spans);

/// Outermost spans (contained in no other span); identical-extent ties keep the first in
/// canonical order.
SpanList outermost(const SpanList& spans);

}  // namespace nerforge
