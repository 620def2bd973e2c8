#pragma once

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nerforge {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Request for a tagset (or head) the model does not have.
class RoutingError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Spans that cannot be encoded (overlap in flat data, crossing or too deep in nested data).
class SpanError : public Error {
 public:
  using Error::Error;
};

struct Token {
  std::string text;
  std::size_t index = 0;

  bool operator==(const Token&) const = default;
};

/// Half-open token interval [start, end) with an entity type.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string etype;

  std::size_t length() const { return end - start; }
  bool contains(const EntitySpan& o) const { return start <= o.start && o.end <= end; }
  bool overlaps(const EntitySpan& o) const { return start < o.end && o.start < end; }
  bool crosses(const EntitySpan& o) const { return overlaps(o) && !contains(o) && !o.contains(*this); }

  auto operator<=>(const EntitySpan&) const = default;
  bool operator==(const EntitySpan&) const = default;
};

/// Outer-to-inner order: ascending start, descending length, ascending etype.
struct CanonicalOrder {
  bool operator()(const EntitySpan& a, const EntitySpan& b) const {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end > b.end;
    return a.etype < b.etype;
  }
};

using SpanList = std::vector<EntitySpan>;

struct Sentence {
  std::vector<Token> tokens;
  SpanList flat_spans;    // pairwise disjoint, canonical order
  SpanList nested_spans;  // pairwise non-crossing, canonical order

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> words() const;

  bool operator==(const Sentence&) const = default;
};

struct Document {
  std::string id;
  std::string corpus_id;
  std::string language;
  std::vector<Sentence> sentences;
};

/// Builds a sentence from raw token strings, assigning indices.
Sentence make_sentence(const std::vector<std::string>& words);

/// Sorts spans into canonical order and removes exact duplicates.
void canonicalize(SpanList& spans);

/// Throws ParseError/SpanError when a span is out of range or has an invalid etype.
void check_span(const EntitySpan& span, std::size_t n_tokens);

/// Checks every Sentence invariant (bounds, flat disjointness, nested non-crossing).
void validate_sentence(const Sentence& sentence);

}  // namespace nerforge
