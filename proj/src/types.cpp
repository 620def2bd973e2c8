#include "nerforge/types.hpp"

#include <algorithm>

namespace nerforge {

std::vector<std::string> Sentence::words() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

Sentence make_sentence(const std::vector<std::string>& words) {
  Sentence s;
  s.tokens.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) s.tokens.push_back({words[i], i});
  return s;
}

void canonicalize(SpanList& spans) {
  std::sort(spans.begin(), spans.end(), CanonicalOrder{});
  spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
}

void check_span(const EntitySpan& span, std::size_t n_tokens) {
  if (span.start >= span.end || span.end > n_tokens)
    throw SpanError("span [" + std::to_string(span.start) + "," + std::to_string(span.end) +
                    ") out of range for " + std::to_string(n_tokens) + " tokens");
  if (span.etype.empty()) throw SpanError("span with empty entity type");
  for (char c : span.etype)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '|')
      throw SpanError("entity type '" + span.etype + "' contains whitespace or '|'");
}

void validate_sentence(const Sentence& sentence) {
  const auto n = sentence.size();
  for (const auto& tok : sentence.tokens) {
    if (tok.text.empty()) throw SpanError("empty token");
    if (tok.text.find_first_of("\n\r\v\f") != std::string::npos)
      throw SpanError("token contains vertical whitespace");
  }
  for (const auto& s : sentence.flat_spans) check_span(s, n);
  for (const auto& s : sentence.nested_spans) check_span(s, n);
  for (std::size_t i = 0; i < sentence.flat_spans.size(); ++i)
    for (std::size_t j = i + 1; j < sentence.flat_spans.size(); ++j)
      if (sentence.flat_spans[i].overlaps(sentence.flat_spans[j]))
        throw SpanError("overlapping flat spans");
  for (std::size_t i = 0; i < sentence.nested_spans.size(); ++i)
    for (std::size_t j = i + 1; j < sentence.nested_spans.size(); ++j)
      if (sentence.nested_spans[i].crosses(sentence.nested_spans[j]))
        throw SpanError("crossing nested spans");
}

}  // namespace nerforge
