#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fictdet {

// Ordered tokens of one document.
//
// Invariants: no token is empty or contains whitespace, and re-tokenising the
// space-joined tokens yields the same list.
struct TokenStream {
  std::string source_id;
  std::vector<std::string> tokens;

  std::string joined() const;
};

// Maps quote and dash variants onto their ASCII forms:
//   U+2018 U+2019 U+201B                 -> '
//   U+201C U+201D U+201F U+00AB U+00BB   -> "
//   U+2010..U+2015 U+2212                -> -
// Everything else passes through byte for byte.
std::string normalize_punctuation(std::string_view text);

// Case-preserving word/punctuation tokeniser.
//
// After normalisation the text is split into maximal alphanumeric runs and
// single-character punctuation tokens; whitespace is dropped. Within a word:
//   - an apostrophe between two word characters stays in the word (don't);
//   - a hyphen (U+002D, U+2010, U+2011) between two word characters stays in
//     the word (to-day). En/em dashes and other dash variants always stand
//     alone, even when they join two words without spaces;
//   - a leading apostrophe is attached when the following word is a known
//     elision ('em, 'tis, ...); otherwise it is an opening quote.
// Non-ASCII letters (accented Latin, Greek, Cyrillic, ...) are word characters.
TokenStream tokenize(std::string_view text, std::string source_id = {});

// Elisions that keep their leading apostrophe. Matched case-insensitively.
std::span<const std::string_view> elision_list();

// Case-folded a-z counts across the corpus, normalised to sum 1.
// Throws if the corpus contains no letters.
std::array<double, 26> letter_distribution(std::span<const TokenStream> corpus);

}  // namespace fictdet
