#include "fictdet/tokenizer.hpp"

#include <algorithm>
#include <cstdint>

#include "fictdet/error.hpp"

namespace fictdet {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

enum class CharClass { Space, Word, Apostrophe, Hyphen, Dash, Punct };

struct Char {
  CharClass cls;
  std::string text;  // normalised UTF-8 bytes
};

// Decodes one code point starting at s[i]; advances i. Malformed input
// decodes to U+FFFD, consuming a single byte.
char32_t decode(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return kReplacement;
  }
  if (i + len > s.size()) {
    ++i;
    return kReplacement;
  }
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++i;
    return kReplacement;
  }
  i += len;
  return cp;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_single_quote(char32_t cp) { return cp == 0x2018 || cp == 0x2019 || cp == 0x201B; }

bool is_double_quote(char32_t cp) {
  return cp == 0x201C || cp == 0x201D || cp == 0x201F || cp == 0x00AB || cp == 0x00BB;
}

bool is_dash(char32_t cp) { return (cp >= 0x2010 && cp <= 0x2015) || cp == 0x2212; }

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

bool is_unicode_space(char32_t cp) {
  return in(cp, 0x80, 0xA0) || cp == 0x1680 || in(cp, 0x2000, 0x200B) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000 || cp == 0xFEFF;
}

bool is_unicode_punct(char32_t cp) {
  if (in(cp, 0xA1, 0xBF)) return cp != 0xAA && cp != 0xB5 && cp != 0xBA;
  return cp == 0xD7 || cp == 0xF7 || in(cp, 0x2016, 0x2BFF) || in(cp, 0x2E00, 0x2E7F) ||
         in(cp, 0x3001, 0x303F) || in(cp, 0xFE10, 0xFE6F) || in(cp, 0xFF01, 0xFF0F) ||
         in(cp, 0xFF1A, 0xFF20) || in(cp, 0xFF3B, 0xFF40) || in(cp, 0xFF5B, 0xFF65) ||
         in(cp, 0xFFF0, 0xFFFF) || in(cp, 0x1F000, 0x1FAFF);
}

Char classify(char32_t cp) {
  if (cp < 0x80) {
    const char c = static_cast<char>(cp);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || cp < 0x20 ||
        cp == 0x7F)
      return {CharClass::Space, {}};
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'))
      return {CharClass::Word, std::string(1, c)};
    if (c == '\'') return {CharClass::Apostrophe, "'"};
    if (c == '-') return {CharClass::Hyphen, "-"};
    return {CharClass::Punct, std::string(1, c)};
  }
  if (is_single_quote(cp)) return {CharClass::Apostrophe, "'"};
  if (is_double_quote(cp)) return {CharClass::Punct, "\""};
  if (cp == 0x2010 || cp == 0x2011) return {CharClass::Hyphen, "-"};
  if (is_dash(cp)) return {CharClass::Dash, "-"};
  if (is_unicode_space(cp)) return {CharClass::Space, {}};
  std::string bytes;
  encode(cp, bytes);
  if (cp == kReplacement || is_unicode_punct(cp)) return {CharClass::Punct, bytes};
  return {CharClass::Word, bytes};
}

constexpr std::string_view kElisions[] = {
    "em",   "tis",  "twas", "twere", "twill", "twould", "im", "ave", "ad",
    "arf",  "alf",  "ow",   "bout",  "cause", "cos",    "til", "un",  "uns",
};

bool is_elision(std::string_view word) {
  std::string lower(word);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) {
    return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  });
  return std::find(std::begin(kElisions), std::end(kElisions), lower) != std::end(kElisions);
}

// Consumes a word starting at chars[i] (which must be a Word character) and
// returns the index one past its end.
std::size_t scan_word(const std::vector<Char>& chars, std::size_t i, std::string& out) {
  const std::size_t n = chars.size();
  while (i < n) {
    const auto cls = chars[i].cls;
    if (cls == CharClass::Word) {
      out += chars[i].text;
      ++i;
    } else if ((cls == CharClass::Apostrophe || cls == CharClass::Hyphen) && i + 1 < n &&
               chars[i + 1].cls == CharClass::Word) {
      out += chars[i].text;
      ++i;
    } else {
      break;
    }
  }
  return i;
}

}  // namespace

std::string TokenStream::joined() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string normalize_punctuation(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    const char32_t cp = decode(text, i);
    if (is_single_quote(cp)) {
      out.push_back('\'');
    } else if (is_double_quote(cp)) {
      out.push_back('"');
    } else if (is_dash(cp)) {
      out.push_back('-');
    } else {
      out.append(text.substr(start, i - start));
    }
  }
  return out;
}

TokenStream tokenize(std::string_view text, std::string source_id) {
  std::vector<Char> chars;
  chars.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) chars.push_back(classify(decode(text, i)));

  TokenStream stream;
  stream.source_id = std::move(source_id);
  const std::size_t n = chars.size();
  std::size_t i = 0;
  while (i < n) {
    switch (chars[i].cls) {
      case CharClass::Space:
        ++i;
        break;
      case CharClass::Word: {
        std::string word;
        i = scan_word(chars, i, word);
        stream.tokens.push_back(std::move(word));
        break;
      }
      case CharClass::Apostrophe: {
        if (i + 1 < n && chars[i + 1].cls == CharClass::Word) {
          std::string word;
          const std::size_t end = scan_word(chars, i + 1, word);
          if (is_elision(word)) {
            stream.tokens.push_back("'" + word);
            i = end;
            break;
          }
        }
        stream.tokens.emplace_back("'");
        ++i;
        break;
      }
      case CharClass::Hyphen:
      case CharClass::Dash:
      case CharClass::Punct:
        stream.tokens.push_back(chars[i].text);
        ++i;
        break;
    }
  }
  return stream;
}

std::span<const std::string_view> elision_list() { return kElisions; }

std::array<double, 26> letter_distribution(std::span<const TokenStream> corpus) {
  if (corpus.empty()) fail(ErrorCode::InvalidArgument, "letter_distribution: empty corpus");
  std::array<std::uint64_t, 26> counts{};
  std::uint64_t total = 0;
  for (const auto& stream : corpus) {
    for (const auto& token : stream.tokens) {
      for (char c : token) {
        int k = -1;
        if (c >= 'a' && c <= 'z') k = c - 'a';
        if (c >= 'A' && c <= 'Z') k = c - 'A';
        if (k >= 0) {
          ++counts[k];
          ++total;
        }
      }
    }
  }
  if (total == 0) fail(ErrorCode::InvalidArgument, "letter_distribution: corpus contains no letters");
  std::array<double, 26> dist{};
  for (int k = 0; k < 26; ++k) dist[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
  return dist;
}

}  // namespace fictdet
