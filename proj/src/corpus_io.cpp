#include "nerforge/corpus_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "nerforge/span_codec.hpp"

namespace nerforge {

namespace {

constexpr std::string_view kDocStart = "-DOCSTART-";

std::vector<std::string_view> split_columns(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) cols.push_back(line.substr(i, j - i));
    i = j;
  }
  return cols;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::size_t resolve(ColumnIndex idx, std::size_t ncols, std::size_t line_no) {
  long long pos = idx < 0 ? static_cast<long long>(ncols) + idx : idx;
  if (pos < 0 || static_cast<std::size_t>(pos) >= ncols)
    throw ParseError("expected column " + std::to_string(idx) + " but line has " +
                         std::to_string(ncols) + " columns",
                     line_no);
  return static_cast<std::size_t>(pos);
}

/// Line-oriented reader shared by both formats: calls `on_row` per token line and groups
/// rows into sentences and documents.
class ColumnReader {
 public:
  struct Row {
    std::size_t line_no;
    std::vector<std::string_view> cols;
  };

  template <typename FinishSentence>
  std::vector<Document> read(std::string_view text, FinishSentence finish) {
    std::vector<Document> docs;
    Document current;
    std::vector<Row> rows;
    auto flush_sentence = [&] {
      if (rows.empty()) return;
      current.sentences.push_back(finish(rows, current.sentences.size()));
      rows.clear();
    };
    auto flush_document = [&] {
      flush_sentence();
      if (!current.sentences.empty()) {
        current.id = std::to_string(docs.size());
        docs.push_back(std::move(current));
      }
      current = Document{};
    };
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = strip_cr(text.substr(pos, nl - pos));
      pos = nl + 1;
      ++line_no;
      if (is_blank(line)) {
        flush_sentence();
        continue;
      }
      auto cols = split_columns(line);
      if (cols.front() == kDocStart) {
        flush_document();
        continue;
      }
      rows.push_back({line_no, std::move(cols)});
    }
    flush_document();
    return docs;
  }
};

}  // namespace

std::vector<Document> parse_flat_conll(std::string_view text, ColumnIndex token_column,
                                       ColumnIndex label_column) {
  std::size_t expected_cols = 0;
  return ColumnReader{}.read(text, [&](const std::vector<ColumnReader::Row>& rows, std::size_t) {
    std::vector<std::string> words, labels;
    for (const auto& row : rows) {
      if (expected_cols == 0) expected_cols = row.cols.size();
      if (row.cols.size() != expected_cols)
        throw ParseError("expected " + std::to_string(expected_cols) + " columns, found " +
                             std::to_string(row.cols.size()),
                         row.line_no);
      words.emplace_back(row.cols[resolve(token_column, row.cols.size(), row.line_no)]);
      std::string_view label = row.cols[resolve(label_column, row.cols.size(), row.line_no)];
      if (label != kOutside) {
        auto parsed = Label::parse(label);
        if (!parsed) throw ParseError("unknown label '" + std::string(label) + "'", row.line_no);
        try {
          check_span({0, 1, parsed->etype}, 1);
        } catch (const SpanError& e) {
          throw ParseError(e.what(), row.line_no);
        }
      }
      labels.emplace_back(label);
    }
    Sentence s = make_sentence(words);
    s.flat_spans = bio_to_spans(labels);
    return s;
  });
}

std::vector<Document> parse_conll_tokens(std::string_view text, ColumnIndex token_column) {
  return ColumnReader{}.read(text, [&](const std::vector<ColumnReader::Row>& rows, std::size_t) {
    std::vector<std::string> words;
    for (const auto& row : rows)
      words.emplace_back(row.cols[resolve(token_column, row.cols.size(), row.line_no)]);
    return make_sentence(words);
  });
}

std::string write_flat_conll(const Document& doc, ColumnOrder order) {
  std::string out;
  for (const auto& s : doc.sentences) {
    std::vector<std::string> labels;
    try {
      labels = spans_to_bio(s.size(), s.flat_spans);
    } catch (const SpanError& e) {
      throw SpanError("document '" + doc.id + "': " + e.what());
    }
    for (std::size_t t = 0; t < s.size(); ++t) {
      const auto& word = s.tokens[t].text;
      if (order == ColumnOrder::TokenLabel)
        out += word + '\t' + labels[t] + '\n';
      else
        out += labels[t] + '\t' + word + '\n';
    }
    out += '\n';
  }
  return out;
}

std::string write_flat_conll(const std::vector<Document>& docs, ColumnOrder order) {
  if (docs.size() == 1) return write_flat_conll(docs.front(), order);
  std::string out;
  for (const auto& d : docs) {
    out += order == ColumnOrder::TokenLabel ? "-DOCSTART-\tO\n\n" : "O\t-DOCSTART-\n\n";
    out += write_flat_conll(d, order);
  }
  return out;
}

std::vector<Document> parse_nested(std::string_view text) {
  return ColumnReader{}.read(text, [&](const std::vector<ColumnReader::Row>& rows, std::size_t index) {
    std::vector<std::string> words;
    LinearizedLabels ll;
    for (const auto& row : rows) {
      if (row.cols.size() != 2)
        throw ParseError("expected 2 columns, found " + std::to_string(row.cols.size()), row.line_no);
      words.emplace_back(row.cols[0]);
      auto& stack = ll.per_token.emplace_back();
      std::string_view ann = row.cols[1];
      if (ann == kOutside) continue;
      std::size_t pos = 0;
      while (true) {
        std::size_t bar = ann.find('|', pos);
        std::string_view part = ann.substr(pos, bar == std::string_view::npos ? bar : bar - pos);
        auto label = Label::parse(part);
        if (!label) throw ParseError("unknown label '" + std::string(part) + "'", row.line_no);
        stack.push_back(std::move(*label));
        if (bar == std::string_view::npos) break;
        pos = bar + 1;
      }
    }
    Sentence s = make_sentence(words);
    s.nested_spans = delinearize(ll);
    bool valid = true;
    try {
      valid = linearize(words.size(), s.nested_spans, std::numeric_limits<std::size_t>::max()) == ll;
    } catch (const SpanError&) {
      valid = false;
    }
    if (!valid)
      throw ParseError("sentence " + std::to_string(index + 1) + " (starting at line " +
                       std::to_string(rows.front().line_no) +
                       "): labels do not encode a non-crossing, canonically ordered nesting");
    return s;
  });
}

std::string write_nested(const Document& doc) {
  std::string out;
  for (const auto& s : doc.sentences) {
    auto ll = linearize(s.size(), s.nested_spans, std::numeric_limits<std::size_t>::max());
    for (std::size_t t = 0; t < s.size(); ++t) {
      out += s.tokens[t].text;
      out += '\t';
      const auto& stack = ll.per_token[t];
      if (stack.empty()) out += kOutside;
      for (std::size_t k = 0; k < stack.size(); ++k) {
        if (k) out += '|';
        out += stack[k].str();
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::string write_nested(const std::vector<Document>& docs) {
  if (docs.size() == 1) return write_nested(docs.front());
  std::string out;
  for (const auto& d : docs) out += "-DOCSTART-\tO\n\n" + write_nested(d);
  return out;
}

Sentence flatten_to_outermost(const Sentence& sentence) {
  Sentence out = sentence;
  out.flat_spans = outermost(sentence.nested_spans);
  return out;
}

Document flatten_to_outermost(const Document& doc) {
  Document out = doc;
  for (auto& s : out.sentences) s = flatten_to_outermost(s);
  return out;
}

Document map_labels(const Document& doc, const LabelMapping& mapping) {
  auto relabel = [&](SpanList& spans) {
    SpanList kept;
    for (auto& s : spans) {
      auto it = mapping.find(s.etype);
      if (it == mapping.end()) {
        kept.push_back(std::move(s));
      } else if (it->second) {
        s.etype = *it->second;
        kept.push_back(std::move(s));
      }
    }
    canonicalize(kept);  // two types mapped to one may now coincide
    spans = std::move(kept);
  };
  Document out = doc;
  for (auto& s : out.sentences) {
    relabel(s.flat_spans);
    relabel(s.nested_spans);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace nerforge
