#include "nerforge/tokenizer.hpp"

#include <cstdint>

namespace nerforge {
namespace {

struct Char {
  char32_t code = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<Char> decode(std::string_view text) {
  std::vector<Char> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    char32_t cp = b;
    if (b >= 0xC0 && b < 0xE0) len = 2, cp = b & 0x1F;
    else if (b >= 0xE0 && b < 0xF0) len = 3, cp = b & 0x0F;
    else if (b >= 0xF0 && b < 0xF8) len = 4, cp = b & 0x07;
    bool ok = len == 1 ? b < 0x80 : i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto c = static_cast<unsigned char>(text[i + k]);
      if ((c & 0xC0) != 0x80) ok = false;
      else cp = (cp << 6) | (c & 0x3F);
    }
    if (!ok) len = 1, cp = 0xFFFD;  // opaque byte
    out.push_back({cp, i, i + len});
    i += len;
  }
  return out;
}

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0xA0 ||
         c == 0x3000 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0xFEFF;
}

bool is_punct(char32_t c) {
  if (c < 0x80) return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
                       (c >= 0x7B && c <= 0x7E);
  return c == 0xA1 || c == 0xA7 || c == 0xAB || c == 0xB6 || c == 0xB7 || c == 0xBB || c == 0xBF ||
         (c >= 0x2010 && c <= 0x205E) || (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0x3014 && c <= 0x301F) || (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
         (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

bool is_ideograph(char32_t c) {
  return (c >= 0x3040 && c <= 0x30FF) || (c >= 0x3400 && c <= 0x4DBF) || (c >= 0x4E00 && c <= 0x9FFF) ||
         (c >= 0xAC00 && c <= 0xD7AF) || (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x20000 && c <= 0x2FFFF);
}

bool is_upper(char32_t c) {
  return (c >= 'A' && c <= 'Z') || (c >= 0xC0 && c <= 0xDE && c != 0xD7) || (c >= 0x391 && c <= 0x3A9) ||
         (c >= 0x400 && c <= 0x42F) ||
         // Latin Extended-A alternates upper/lower case
         (c >= 0x100 && c <= 0x17F && c % 2 == 0 && !(c >= 0x138 && c <= 0x148)) ||
         (c >= 0x139 && c <= 0x148 && c % 2 == 1);
}

bool is_terminal(char32_t c) { return c == '.' || c == '!' || c == '?' || c == 0x3002 || c == 0xFF01 || c == 0xFF1F; }
bool is_ideographic_terminal(char32_t c) { return c == 0x3002 || c == 0xFF01 || c == 0xFF1F; }

bool is_closer(char32_t c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}' || c == 0xBB || c == 0x2019 || c == 0x201D ||
         c == 0x300D || c == 0x300F || c == 0xFF09;
}

struct RawToken {
  std::string text;
  char32_t single = 0;  // code point when the token is one punctuation character
  bool space_before = false;
};

}  // namespace

std::vector<Sentence> tokenize_plain(std::string_view text) {
  const auto chars = decode(text);
  std::vector<RawToken> tokens;
  bool pending_space = false;
  bool in_word = false;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    const auto& ch = chars[i];
    const auto piece = text.substr(ch.begin, ch.end - ch.begin);
    if (is_space(ch.code)) {
      pending_space = true;
      in_word = false;
      continue;
    }
    const bool numeric_joint = (ch.code == '.' || ch.code == ',') && in_word && i > 0 && is_digit(chars[i - 1].code) &&
                               i + 1 < chars.size() && is_digit(chars[i + 1].code);
    if (is_punct(ch.code) && !numeric_joint) {
      tokens.push_back({std::string(piece), ch.code, pending_space});
      in_word = false;
    } else if (in_word) {
      tokens.back().text += piece;
    } else {
      tokens.push_back({std::string(piece), 0, pending_space});
      in_word = true;
    }
    pending_space = false;
  }

  std::vector<Sentence> out;
  std::vector<std::string> current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(make_sentence(current));
    current.clear();
  };
  std::size_t sentence_start = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (t > sentence_start) {
      // Walk back over closers to the sentence-final punctuation, if any.
      std::size_t k = t;
      while (k > sentence_start + 1 && tokens[k - 1].single && is_closer(tokens[k - 1].single)) --k;
      const auto last = tokens[k - 1].single;
      if (last && is_terminal(last)) {
        const auto first = decode(tokens[t].text).front().code;
        const bool starts = is_upper(first) || is_ideograph(first);
        const bool spaced = tokens[t].space_before || (is_ideographic_terminal(last) && k == t);
        if (starts && spaced) {
          flush();
          sentence_start = t;
        }
      }
    }
    current.push_back(std::move(tokens[t].text));
  }
  flush();
  return out;
}

}  // namespace nerforge
