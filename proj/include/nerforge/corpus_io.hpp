#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nerforge/types.hpp"

namespace nerforge {

/// Column index; negative values count from the last column (-1 = last).
using ColumnIndex = int;

/// Reads CoNLL-style columnar text. Labels may be IOB1 or BIO; spans land in `flat_spans`.
/// `-DOCSTART-` lines start a new document and never become tokens.
std::vector<Document> parse_flat_conll(std::string_view text, ColumnIndex token_column = 0,
                                       ColumnIndex label_column = -1);

/// Reads token columns only (labels, if present, are ignored).
std::vector<Document> parse_conll_tokens(std::string_view text, ColumnIndex token_column = 0);

enum class ColumnOrder { TokenLabel, LabelToken };

/// Tab-separated `token<TAB>label` lines, blank line after each sentence.
std::string write_flat_conll(const Document& doc, ColumnOrder order = ColumnOrder::TokenLabel);

/// Several documents separated by `-DOCSTART-` lines (omitted for a single document).
std::string write_flat_conll(const std::vector<Document>& docs,
                             ColumnOrder order = ColumnOrder::TokenLabel);

/// Reads `token<TAB>ann` lines where ann is `O` or `|`-joined BIO labels, outer to inner.
/// Sentences whose labels do not encode a valid non-crossing nesting are rejected.
std::vector<Document> parse_nested(std::string_view text);
std::string write_nested(const Document& doc);
std::string write_nested(const std::vector<Document>& docs);

/// Copies the sentence with flat_spans replaced by the outermost nested spans.
Sentence flatten_to_outermost(const Sentence& sentence);
Document flatten_to_outermost(const Document& doc);

/// etype -> replacement, or nullopt to drop spans of that type. Unmapped types pass through.
using LabelMapping = std::map<std::string, std::optional<std::string>, std::less<>>;

Document map_labels(const Document& doc, const LabelMapping& mapping);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace nerforge
