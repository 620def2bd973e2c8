#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "nerforge/types.hpp"

namespace nerforge {

/// Rule-based tokenizer for raw UTF-8 text.
///
/// Tokens split on whitespace; punctuation characters (ASCII and common Unicode
/// punctuation) become single-character tokens, except `.` and `,` between two digits.
/// A sentence ends after `.`, `!`, `?` (or `。！？`), optionally followed by closing quotes
/// or brackets, when whitespace and then an uppercase letter or ideograph follow. The
/// ideographic terminators also end a sentence without intervening whitespace.
/// Invalid UTF-8 bytes are kept inside tokens unchanged.
std::vector<Sentence> tokenize_plain(std::string_view text);

}  // namespace nerforge
