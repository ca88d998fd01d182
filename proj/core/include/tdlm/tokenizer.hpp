#ifndef TDLM_TOKENIZER_HPP_
#define TDLM_TOKENIZER_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "tdlm/base.hpp"

TDLM_NAMESPACE_BEGIN

struct TokenizerOptions {
  // Split a line into several sentences after `.`, `?` or `!` followed by
  // whitespace. Newlines always end a sentence.
  bool split_sentences = true;
  // "don't" -> "do" "n't", "it's" -> "it" "'s".
  bool split_contractions = false;
};

using Sentence = std::vector<std::string>;

// Lowercases ASCII letters and splits punctuation from words. Apostrophes
// and hyphens between letters or digits stay inside the word, as do `.` and
// `,` between digits.
std::vector<Sentence> tokenize(std::string_view text, const TokenizerOptions& options = {});

TDLM_NAMESPACE_END

#endif  // TDLM_TOKENIZER_HPP_
