#include "nerforge/span_codec.hpp"

#include <algorithm>

namespace nerforge {

namespace {

std::string describe(const EntitySpan& s) {
  return "(" + std::to_string(s.start) + "," + std::to_string(s.end) + "," + s.etype + ")";
}

}  // namespace

std::string Label::str() const { return (prefix == Prefix::Begin ? "B-" : "I-") + etype; }

std::optional<Label> Label::parse(std::string_view text) {
  if (text.size() < 3 || text[1] != '-') return std::nullopt;
  if (text[0] == 'B') return Label{Prefix::Begin, std::string(text.substr(2))};
  if (text[0] == 'I') return Label{Prefix::Inside, std::string(text.substr(2))};
  return std::nullopt;
}

std::vector<std::string> spans_to_bio(std::size_t n_tokens, const SpanList& spans) {
  std::vector<std::string> labels(n_tokens, std::string(kOutside));
  SpanList sorted = spans;
  std::sort(sorted.begin(), sorted.end(), CanonicalOrder{});
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    check_span(sorted[i], n_tokens);
    if (i > 0 && sorted[i - 1].overlaps(sorted[i]))
      throw SpanError("overlapping spans " + describe(sorted[i - 1]) + " and " + describe(sorted[i]));
  }
  for (const auto& s : sorted) {
    labels[s.start] = "B-" + s.etype;
    for (std::size_t t = s.start + 1; t < s.end; ++t) labels[t] = "I-" + s.etype;
  }
  return labels;
}

SpanList bio_to_spans(const std::vector<std::string>& labels) {
  SpanList out;
  std::optional<EntitySpan> open;
  auto close = [&](std::size_t end) {
    if (open) {
      open->end = end;
      out.push_back(std::move(*open));
      open.reset();
    }
  };
  for (std::size_t t = 0; t < labels.size(); ++t) {
    auto label = Label::parse(labels[t]);
    if (!label) {
      close(t);
      continue;
    }
    if (label->prefix == Prefix::Inside && open && open->etype == label->etype) continue;
    close(t);
    open = EntitySpan{t, t, std::move(label->etype)};
  }
  close(labels.size());
  return out;
}

LinearizedLabels linearize(std::size_t n_tokens, const SpanList& spans, std::size_t max_depth) {
  SpanList sorted = spans;
  std::sort(sorted.begin(), sorted.end(), CanonicalOrder{});
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    check_span(sorted[i], n_tokens);
    if (i > 0 && sorted[i - 1] == sorted[i])
      throw SpanError("duplicate span " + describe(sorted[i]));
  }
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for (std::size_t j = i + 1; j < sorted.size() && sorted[j].start < sorted[i].end; ++j)
      if (sorted[i].crosses(sorted[j]))
        throw SpanError("crossing spans " + describe(sorted[i]) + " and " + describe(sorted[j]));

  LinearizedLabels out;
  out.per_token.resize(n_tokens);
  // Canonical order is outer-to-inner, so appending in sorted order stacks each token correctly.
  for (const auto& s : sorted)
    for (std::size_t t = s.start; t < s.end; ++t) {
      auto& stack = out.per_token[t];
      if (stack.size() >= max_depth)
        throw SpanError("nesting depth exceeds " + std::to_string(max_depth) + " at token " +
                        std::to_string(t));
      stack.push_back({t == s.start ? Prefix::Begin : Prefix::Inside, s.etype});
    }
  return out;
}

SpanList delinearize(const LinearizedLabels& labels) {
  SpanList out;
  std::vector<EntitySpan> open;  // indexed by slot
  auto close_from = [&](std::size_t slot, std::size_t end) {
    while (open.size() > slot) {
      open.back().end = end;
      out.push_back(std::move(open.back()));
      open.pop_back();
    }
  };
  for (std::size_t t = 0; t < labels.per_token.size(); ++t) {
    const auto& stack = labels.per_token[t];
    for (std::size_t k = 0; k < stack.size(); ++k) {
      const auto& label = stack[k];
      if (label.prefix == Prefix::Inside && k < open.size() && open[k].etype == label.etype) continue;
      close_from(k, t);
      open.push_back({t, t, label.etype});
    }
    close_from(stack.size(), t);
  }
  close_from(0, labels.per_token.size());
  std::sort(out.begin(), out.end(), CanonicalOrder{});
  return out;
}

bool non_crossing(const SpanList& spans) {
  for (std::size_t i = 0; i < spans.size(); ++i)
    for (std::size_t j = i + 1; j < spans.size(); ++j)
      if (spans[i].crosses(spans[j])) return false;
  return true;
}

SpanList outermost(const SpanList& spans) {
  SpanList sorted = spans;
  std::sort(sorted.begin(), sorted.end(), CanonicalOrder{});
  SpanList out;
  for (const auto& s : sorted)
    if (out.empty() || !out.back().contains(s)) {
      if (!out.empty() && out.back().overlaps(s)) continue;  // crossing input; keep the earlier span
      out.push_back(s);
    }
  return out;
}

}  // namespace nerforge
